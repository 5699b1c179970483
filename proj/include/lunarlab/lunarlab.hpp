#pragma once

#include "lunarlab/random.hpp"
#include "lunarlab/env.hpp"
#include "lunarlab/tile_coding.hpp"
#include "lunarlab/rlcore.hpp"
#include "lunarlab/heuristic.hpp"
#include "lunarlab/tabular.hpp"
#include "lunarlab/nn.hpp"
#include "lunarlab/replay.hpp"
#include "lunarlab/deep_agents.hpp"
#include "lunarlab/metrics.hpp"
#include "lunarlab/io.hpp"
#include "lunarlab/runner.hpp"
