#pragma once

#include "adversary.hpp"
#include "angles.hpp"
#include "config.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "metrics.hpp"
#include "noise.hpp"
#include "plans.hpp"
#include "replay.hpp"
#include "rng.hpp"
#include "state.hpp"
#include "targets.hpp"
#include "verify.hpp"
