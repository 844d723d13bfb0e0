#pragma once

#include "qvar/analysis.hpp"
#include "qvar/errors.hpp"
#include "qvar/estimate.hpp"
#include "qvar/optimize.hpp"
#include "qvar/oracle.hpp"
#include "qvar/qgaussian.hpp"
#include "qvar/risk.hpp"
#include "qvar/series.hpp"
#include "qvar/special_fn.hpp"

namespace qvar {
inline constexpr const char* kVersion = "0.1.0";
}
