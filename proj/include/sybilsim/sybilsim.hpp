#pragma once

#include "sybilsim/adversary.hpp"
#include "sybilsim/assumptions.hpp"
#include "sybilsim/baselines.hpp"
#include "sybilsim/checkers.hpp"
#include "sybilsim/churn.hpp"
#include "sybilsim/config.hpp"
#include "sybilsim/engine.hpp"
#include "sybilsim/epochs.hpp"
#include "sybilsim/error.hpp"
#include "sybilsim/experiments.hpp"
#include "sybilsim/format.hpp"
#include "sybilsim/heuristics.hpp"
#include "sybilsim/initialization.hpp"
#include "sybilsim/membership.hpp"
#include "sybilsim/rng.hpp"
#include "sybilsim/togcom.hpp"
#include "sybilsim/trace.hpp"
