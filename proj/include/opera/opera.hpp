#pragma once

// Everything except the HTTP service and the CLI, which pull in httplib and
// CLI11.

#include "opera/dfg.hpp"
#include "opera/discovery.hpp"
#include "opera/error.hpp"
#include "opera/inductive_miner.hpp"
#include "opera/metrics.hpp"
#include "opera/model_io.hpp"
#include "opera/ocel.hpp"
#include "opera/ocel_io.hpp"
#include "opera/petri_net.hpp"
#include "opera/process_tree.hpp"
#include "opera/replay.hpp"
#include "opera/time.hpp"
