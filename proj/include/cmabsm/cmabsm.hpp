#pragma once

#include "cmabsm/action.hpp"
#include "cmabsm/cmab_sm.hpp"
#include "cmabsm/core.hpp"
#include "cmabsm/env.hpp"
#include "cmabsm/errors.hpp"
#include "cmabsm/harness.hpp"
#include "cmabsm/oracle.hpp"
#include "cmabsm/rng.hpp"
#include "cmabsm/ucb.hpp"
