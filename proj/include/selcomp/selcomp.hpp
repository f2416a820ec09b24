#pragma once

#include "selcomp/arm_stats.hpp"
#include "selcomp/bench.hpp"
#include "selcomp/bernoulli.hpp"
#include "selcomp/core.hpp"
#include "selcomp/counterexamples.hpp"
#include "selcomp/mcts.hpp"
#include "selcomp/model.hpp"
#include "selcomp/policies.hpp"
#include "selcomp/stats.hpp"
#include "selcomp/voi.hpp"
