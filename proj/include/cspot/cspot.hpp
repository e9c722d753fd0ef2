#pragma once
// Umbrella header for the whole spotting engine.

#include "cspot/alphabet.hpp"
#include "cspot/ctc.hpp"
#include "cspot/integral.hpp"
#include "cspot/metrics.hpp"
#include "cspot/page_maps.hpp"
#include "cspot/parallel.hpp"
#include "cspot/proposal.hpp"
#include "cspot/scoring.hpp"
#include "cspot/spot_config.hpp"
#include "cspot/synth.hpp"
#include "cspot/types.hpp"
