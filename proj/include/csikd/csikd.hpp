#pragma once

// Umbrella header: the full training and analysis stack.

#include "csikd/adam.hpp"
#include "csikd/bench.hpp"
#include "csikd/channel.hpp"
#include "csikd/dataset.hpp"
#include "csikd/dft.hpp"
#include "csikd/experiments.hpp"
#include "csikd/flops.hpp"
#include "csikd/io.hpp"
#include "csikd/metrics.hpp"
#include "csikd/model.hpp"
#include "csikd/ops.hpp"
#include "csikd/report.hpp"
#include "csikd/rng.hpp"
#include "csikd/sha256.hpp"
#include "csikd/tensor.hpp"
#include "csikd/train.hpp"
