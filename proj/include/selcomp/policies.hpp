#pragma once
// Bayesian policy family for flat Bernoulli selection.

#include "selcomp/blinkered.hpp"
#include "selcomp/myopic.hpp"
#include "selcomp/one_armed.hpp"
#include "selcomp/ucb.hpp"
