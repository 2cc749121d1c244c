#pragma once

#include "advisor.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "metrics.hpp"
#include "network.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "tensor.hpp"
