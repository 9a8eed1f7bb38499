#pragma once

#include "crossrank/baselines.hpp"
#include "crossrank/errors.hpp"
#include "crossrank/feat_io.hpp"
#include "crossrank/feature_set.hpp"
#include "crossrank/hhcr.hpp"
#include "crossrank/matrix.hpp"
#include "crossrank/metrics.hpp"
#include "crossrank/parallel.hpp"
#include "crossrank/synth.hpp"
