#pragma once

#include "execsim/estimation.hpp"
#include "execsim/execution_policy.hpp"
#include "execsim/market_dynamics.hpp"
#include "execsim/random.hpp"
#include "execsim/simulation.hpp"
#include "execsim/valuation.hpp"
