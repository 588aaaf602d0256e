#pragma once

// Convenience header pulling in the whole library.

#include "malcast/error.hpp"
#include "malcast/core/activations.hpp"
#include "malcast/core/keyvalue.hpp"
#include "malcast/core/matrix.hpp"
#include "malcast/core/rng.hpp"
#include "malcast/core/scaler.hpp"
#include "malcast/core/text.hpp"
#include "malcast/data/aggregate.hpp"
#include "malcast/data/csv_io.hpp"
#include "malcast/data/dataset.hpp"
#include "malcast/data/month.hpp"
#include "malcast/data/redistricting.hpp"
#include "malcast/eval/metrics.hpp"
#include "malcast/eval/report.hpp"
#include "malcast/impute/forest.hpp"
#include "malcast/impute/missforest.hpp"
#include "malcast/impute/tree.hpp"
#include "malcast/lstm/adam.hpp"
#include "malcast/lstm/gradcheck.hpp"
#include "malcast/lstm/model_io.hpp"
#include "malcast/lstm/network.hpp"
#include "malcast/lstm/params.hpp"
#include "malcast/lstm/trainer.hpp"
#include "malcast/pipeline/commands.hpp"
#include "malcast/pipeline/config.hpp"
#include "malcast/synth/synthgen.hpp"
#include "malcast/window/windowing.hpp"
