#pragma once

#include "core_model.hpp"
#include "cvx.hpp"
#include "errors.hpp"
#include "harness/config.hpp"
#include "harness/records.hpp"
#include "harness/summarize.hpp"
#include "harness/sweep.hpp"
#include "metrics.hpp"
#include "ncvx.hpp"
#include "noise.hpp"
#include "random.hpp"
#include "suites.hpp"
#include "theory_checks.hpp"
