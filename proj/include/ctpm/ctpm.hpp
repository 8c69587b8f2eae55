#pragma once

#include "ctpm/abstraction.hpp"
#include "ctpm/config.hpp"
#include "ctpm/csv.hpp"
#include "ctpm/encoding.hpp"
#include "ctpm/error.hpp"
#include "ctpm/formats.hpp"
#include "ctpm/ingest.hpp"
#include "ctpm/matrix.hpp"
#include "ctpm/miner.hpp"
#include "ctpm/oracle.hpp"
#include "ctpm/pattern.hpp"
#include "ctpm/risk.hpp"
#include "ctpm/survival.hpp"
#include "ctpm/synth.hpp"
#include "ctpm/viz.hpp"

namespace ctpm {
inline constexpr const char* kVersion = "0.1.0";
}
