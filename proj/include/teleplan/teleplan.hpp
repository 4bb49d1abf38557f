#ifndef TELEPLAN_TELEPLAN_HPP
#define TELEPLAN_TELEPLAN_HPP

// Umbrella header.

#include "teleplan/cells.hpp"
#include "teleplan/closedform.hpp"
#include "teleplan/entropy.hpp"
#include "teleplan/errors.hpp"
#include "teleplan/isometry.hpp"
#include "teleplan/parse.hpp"
#include "teleplan/plan.hpp"
#include "teleplan/serialize.hpp"
#include "teleplan/state.hpp"
#include "teleplan/stateio.hpp"

#endif
