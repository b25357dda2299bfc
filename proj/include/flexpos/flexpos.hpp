#pragma once

// Umbrella header for the whole toolkit.
#include "flexpos/analysis.hpp"
#include "flexpos/config.hpp"
#include "flexpos/control.hpp"
#include "flexpos/errors.hpp"
#include "flexpos/experiments.hpp"
#include "flexpos/kinematics.hpp"
#include "flexpos/plant.hpp"
#include "flexpos/signals.hpp"
#include "flexpos/types.hpp"
#include "flexpos/workspace.hpp"
