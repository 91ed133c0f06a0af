#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "random.hpp"

namespace phaselab {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
/// Row-major complex storage: row k holds one sampling vector, with each
/// entry laid out as an interleaved (real, imaginary) pair.
using RowMajorComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A signal in C^n: the unknown x, an iterate z or an estimate.
using Signal = ComplexVector;

enum class EnsembleFamily { complex_gaussian, symmetrized_bernoulli_mix };

inline std::string_view to_string(EnsembleFamily f) {
  switch (f) {
    case EnsembleFamily::complex_gaussian:
      return "complex_gaussian";
    case EnsembleFamily::symmetrized_bernoulli_mix:
      return "symmetrized_bernoulli_mix";
  }
  return "unknown";
}

inline EnsembleFamily parse_family(std::string_view s) {
  if (s == "complex_gaussian") return EnsembleFamily::complex_gaussian;
  if (s == "symmetrized_bernoulli_mix") return EnsembleFamily::symmetrized_bernoulli_mix;
  throw std::invalid_argument("unsupported ensemble family: " + std::string(s));
}

/// n x n Hermitian matrix. Every constructor conjugate-symmetrizes its input,
/// so the stored matrix equals its adjoint exactly.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(Index n) : data_(ComplexMatrix::Zero(n, n)) {}
  explicit HermitianMatrix(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("HermitianMatrix: matrix is not square");
    data_ = 0.5 * (a + a.adjoint());
    for (Index i = 0; i < data_.rows(); ++i) data_(i, i) = Complex(data_(i, i).real(), 0.0);
  }

  static HermitianMatrix zero(Index n) { return HermitianMatrix(n); }
  static HermitianMatrix identity(Index n) { return HermitianMatrix(ComplexMatrix::Identity(n, n)); }
  /// zz*
  static HermitianMatrix outer(const Signal& z) { return HermitianMatrix(ComplexMatrix(z * z.adjoint())); }

  Index dim() const noexcept { return data_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return data_; }
  Complex operator()(Index i, Index j) const { return data_(i, j); }

  double frobenius_norm() const { return data_.norm(); }
  double trace() const { return data_.trace().real(); }

  HermitianMatrix& operator+=(const HermitianMatrix& o) {
    data_ += o.data_;
    return *this;
  }
  HermitianMatrix& operator-=(const HermitianMatrix& o) {
    data_ -= o.data_;
    return *this;
  }
  HermitianMatrix& operator*=(double s) {
    data_ *= s;
    return *this;
  }
  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }
  friend HermitianMatrix operator*(HermitianMatrix a, double s) { return a *= s; }

 private:
  ComplexMatrix data_;
};

/// m sampling vectors phi_k in C^n, stored as the rows of `vectors`.
struct Ensemble {
  RowMajorComplexMatrix vectors;
  EnsembleFamily family = EnsembleFamily::complex_gaussian;
  double K = 0.0;   ///< sub-Gaussian norm bound of an entry
  double mu = 0.0;  ///< fourth-moment excess: E|phi|^4 = 1 + mu

  Index size() const noexcept { return vectors.rows(); }
  Index dim() const noexcept { return vectors.cols(); }
};

/// Pairs (a_k, b_k) for bilinear measurements b_k* Z a_k.
struct BilinearEnsemble {
  RowMajorComplexMatrix left;   ///< rows a_k
  RowMajorComplexMatrix right;  ///< rows b_k
  EnsembleFamily family = EnsembleFamily::complex_gaussian;
  double K = 0.0;

  Index size() const noexcept { return left.rows(); }
  Index dim() const noexcept { return left.cols(); }
};

namespace detail {

struct FamilyMoments {
  double K;
  double mu;
};

inline FamilyMoments family_moments(EnsembleFamily family) {
  switch (family) {
    case EnsembleFamily::complex_gaussian:
      // |phi|^2 ~ Exp(1): E exp(|phi|^2 / 2) = 2, E|phi|^4 = 2.
      return {M_SQRT2, 1.0};
    case EnsembleFamily::symmetrized_bernoulli_mix:
      // Real parts (R + G)/sqrt(2): E eps^4 = 2.5, so E|phi|^4 = 1.75.
      // K is the triangle-inequality bound on the psi_2 norm.
      return {1.0 / std::sqrt(std::log(2.0)) + std::sqrt(8.0 / 3.0), 0.75};
  }
  throw std::invalid_argument("unsupported ensemble family");
}

inline Complex draw_entry(Rng& rng, EnsembleFamily family) {
  switch (family) {
    case EnsembleFamily::complex_gaussian:
      return rng.complex_normal();
    case EnsembleFamily::symmetrized_bernoulli_mix: {
      auto part = [&rng] {
        const double rademacher = rng.coin() ? 1.0 : -1.0;
        return (rademacher + rng.normal()) * M_SQRT1_2;
      };
      const double re = part();
      const double im = part();
      return {re * M_SQRT1_2, im * M_SQRT1_2};
    }
  }
  throw std::invalid_argument("unsupported ensemble family");
}

inline RowMajorComplexMatrix draw_matrix(EnsembleFamily family, Index rows, Index cols, Rng& rng) {
  RowMajorComplexMatrix out(rows, cols);
  for (Index k = 0; k < rows; ++k) {
    for (Index j = 0; j < cols; ++j) out(k, j) = draw_entry(rng, family);
  }
  return out;
}

inline void require_dims(Index n, Index m) {
  if (n < 1) throw std::invalid_argument("ensemble dimension n must be >= 1");
  if (m < 1) throw std::invalid_argument("ensemble size m must be >= 1");
}

inline void require_match(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " + std::to_string(expected) +
                                ", got " + std::to_string(got) + ")");
  }
}

}  // namespace detail

inline Ensemble draw_ensemble(EnsembleFamily family, Index n, Index m, std::uint64_t seed) {
  detail::require_dims(n, m);
  const auto moments = detail::family_moments(family);
  Rng rng(seed);
  return Ensemble{detail::draw_matrix(family, m, n, rng), family, moments.K, moments.mu};
}

/// Wrap caller-supplied rows. Used for hand-built test designs.
inline Ensemble make_ensemble(RowMajorComplexMatrix rows, EnsembleFamily family = EnsembleFamily::complex_gaussian) {
  detail::require_dims(rows.cols(), rows.rows());
  const auto moments = detail::family_moments(family);
  return Ensemble{std::move(rows), family, moments.K, moments.mu};
}

inline BilinearEnsemble draw_bilinear_ensemble(EnsembleFamily family, Index n, Index m, std::uint64_t seed) {
  detail::require_dims(n, m);
  Rng left_rng(substream(seed, 0));
  Rng right_rng(substream(seed, 1));
  BilinearEnsemble out;
  out.left = detail::draw_matrix(family, m, n, left_rng);
  out.right = detail::draw_matrix(family, m, n, right_rng);
  out.family = family;
  out.K = detail::family_moments(family).K;
  return out;
}

/// Inner products <phi_k, z> = phi_k* z for every k.
inline ComplexVector measure(const Ensemble& e, const Signal& z) {
  detail::require_match(e.dim(), z.size(), "measure");
  return e.vectors.conjugate() * z;
}

/// Phi(z)_k = |<phi_k, z>|^2.
inline RealVector phaseless_apply(const Ensemble& e, const Signal& z) {
  detail::require_match(e.dim(), z.size(), "phaseless_apply");
  return measure(e, z).cwiseAbs2();
}

/// A(Z)_k = <phi_k phi_k*, Z> = phi_k* Z phi_k.
inline RealVector lifted_apply(const Ensemble& e, const HermitianMatrix& z) {
  detail::require_match(e.dim(), z.dim(), "lifted_apply");
  const RowMajorComplexMatrix w = e.vectors.conjugate() * z.matrix();
  return w.cwiseProduct(e.vectors).rowwise().sum().real();
}

/// A*(v) = sum_k v_k phi_k phi_k*.
inline HermitianMatrix lifted_adjoint(const Ensemble& e, const RealVector& v) {
  detail::require_match(e.size(), v.size(), "lifted_adjoint");
  const RowMajorComplexMatrix scaled = v.cast<Complex>().asDiagonal() * e.vectors.conjugate();
  return HermitianMatrix(ComplexMatrix(e.vectors.transpose() * scaled));
}

/// B(Z)_k = b_k* Z a_k, so that B(x h*)_k = b_k* x h* a_k.
inline ComplexVector bilinear_apply(const BilinearEnsemble& b, const ComplexMatrix& z) {
  detail::require_match(b.dim(), z.rows(), "bilinear_apply");
  detail::require_match(b.dim(), z.cols(), "bilinear_apply");
  const RowMajorComplexMatrix w = b.right.conjugate() * z;
  return w.cwiseProduct(b.left).rowwise().sum();
}

/// B*(v) = sum_k v_k b_k a_k*, the adjoint under Re tr(A* B).
inline ComplexMatrix bilinear_adjoint(const BilinearEnsemble& b, const ComplexVector& v) {
  detail::require_match(b.size(), v.size(), "bilinear_adjoint");
  const RowMajorComplexMatrix scaled = v.asDiagonal() * b.left.conjugate();
  return b.right.transpose() * scaled;
}

struct EigenDecomposition {
  RealVector values;     ///< descending
  ComplexMatrix vectors;  ///< column i pairs with values(i)
};

/// Rotate `v` so that its largest-magnitude entry (lowest index on ties) is
/// real and positive.
inline void normalize_phase(Eigen::Ref<ComplexVector> v) {
  Index best = 0;
  double best_mag = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > best_mag) {
      best_mag = mag;
      best = i;
    }
  }
  if (best_mag > 0.0) v *= std::conj(v(best)) / best_mag;
  v(best) = Complex(v(best).real(), 0.0);
}

/// Eigendecomposition with eigenvalues in descending order. Exactly equal
/// eigenvalues keep the order the tridiagonal QR solver produced them in.
inline EigenDecomposition eig_hermitian(const HermitianMatrix& a) {
  const Index n = a.dim();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    // Eigen caps the implicit QR sweep at 30 iterations per dimension.
    throw NumericFailure("eig_hermitian: QR iteration did not converge", static_cast<int>(30 * n));
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const RealVector& ascending = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return ascending(i) > ascending(j); });

  EigenDecomposition out{RealVector(n), ComplexMatrix(n, n)};
  for (Index i = 0; i < n; ++i) {
    out.values(i) = ascending(order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    normalize_phase(out.vectors.col(i));
  }
  return out;
}

/// sum_i lambda_i u_i u_i*
inline HermitianMatrix reconstruct(const EigenDecomposition& d) {
  return HermitianMatrix(ComplexMatrix(d.vectors * d.values.cast<Complex>().asDiagonal() * d.vectors.adjoint()));
}

/// Unit-norm signal drawn uniformly from the complex sphere, scaled to `norm`.
inline Signal random_signal(Index n, double norm, std::uint64_t seed) {
  Rng rng(seed);
  Signal x(n);
  for (Index j = 0; j < n; ++j) x(j) = rng.complex_normal();
  return x * (norm / x.norm());
}

}  // namespace phaselab
