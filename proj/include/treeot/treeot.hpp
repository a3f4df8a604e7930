#pragma once

// Umbrella header: optimal transport on tree metrics, the losses and training
// harness built on it, synthetic data generation, evaluation metrics, and the
// time/memory benchmark driver.

#include "treeot/alloc_stats.hpp"
#include "treeot/bench.hpp"
#include "treeot/datagen.hpp"
#include "treeot/error.hpp"
#include "treeot/fast_exp.hpp"
#include "treeot/io.hpp"
#include "treeot/matrix.hpp"
#include "treeot/metrics.hpp"
#include "treeot/model.hpp"
#include "treeot/network_simplex.hpp"
#include "treeot/objective.hpp"
#include "treeot/prob.hpp"
#include "treeot/rng.hpp"
#include "treeot/sinkhorn.hpp"
#include "treeot/train.hpp"
#include "treeot/transport.hpp"
#include "treeot/tree.hpp"
#include "treeot/version.hpp"
