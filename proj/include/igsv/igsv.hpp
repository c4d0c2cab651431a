#pragma once

#include "igsv/analytics.hpp"
#include "igsv/config.hpp"
#include "igsv/curve.hpp"
#include "igsv/data.hpp"
#include "igsv/estimate.hpp"
#include "igsv/exppoly.hpp"
#include "igsv/model.hpp"
#include "igsv/oracles.hpp"
#include "igsv/random.hpp"
#include "igsv/simulate.hpp"
#include "igsv/stats.hpp"

namespace igsv {
inline constexpr const char* version = "0.1.0";
}
