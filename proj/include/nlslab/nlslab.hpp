#pragma once

#include "nlslab/config.hpp"
#include "nlslab/cutoff.hpp"
#include "nlslab/error.hpp"
#include "nlslab/evolution.hpp"
#include "nlslab/field.hpp"
#include "nlslab/groundstate.hpp"
#include "nlslab/invariants.hpp"
#include "nlslab/io.hpp"
#include "nlslab/modulation.hpp"
#include "nlslab/pipeline.hpp"
#include "nlslab/radial.hpp"
#include "nlslab/spectral.hpp"
#include "nlslab/thresholds.hpp"
#include "nlslab/virial.hpp"

namespace nlslab {
inline constexpr const char* kVersion = "0.1.0";
}
