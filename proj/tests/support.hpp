#pragma once

// Small helpers shared by the unit and acceptance tests.

#include <complex>
#include <cstdint>

#include <phaselab/core_model.hpp>

namespace phaselab::testing {

inline Signal random_complex(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Signal v(n);
  for (Index j = 0; j < n; ++j) v(j) = rng.complex_normal();
  return v;
}

inline ComplexMatrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  ComplexMatrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) a(i, j) = rng.complex_normal();
  }
  return a;
}

inline HermitianMatrix random_hermitian(Index n, std::uint64_t seed) {
  return HermitianMatrix(random_matrix(n, n, seed));
}

/// Real-valued signal with standard normal entries.
inline Signal random_real(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Signal v(n);
  for (Index j = 0; j < n; ++j) v(j) = rng.normal();
  return v;
}

}  // namespace phaselab::testing
