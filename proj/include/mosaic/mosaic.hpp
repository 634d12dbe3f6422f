#pragma once

// Umbrella header: interval/box geometry, the R*-tree index, policy networks
// with sound output bounds, action-region extraction, benchmark dynamics,
// fault models, the layered MDP abstraction, reachability checking,
// refinement, and result aggregation.

#include "mosaic/abstraction.hpp"
#include "mosaic/box.hpp"
#include "mosaic/config.hpp"
#include "mosaic/environment.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/extraction.hpp"
#include "mosaic/faults.hpp"
#include "mosaic/interval.hpp"
#include "mosaic/mdp.hpp"
#include "mosaic/model_check.hpp"
#include "mosaic/network.hpp"
#include "mosaic/parallel.hpp"
#include "mosaic/pipeline.hpp"
#include "mosaic/refinement.hpp"
#include "mosaic/results.hpp"
#include "mosaic/rtree.hpp"
