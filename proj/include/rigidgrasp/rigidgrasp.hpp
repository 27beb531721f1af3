#pragma once

#include "rigidgrasp/types.hpp"
#include "rigidgrasp/errors.hpp"
#include "rigidgrasp/linalg.hpp"
#include "rigidgrasp/rigidity.hpp"
#include "rigidgrasp/grasp.hpp"
#include "rigidgrasp/dynamics.hpp"
#include "rigidgrasp/forces.hpp"
#include "rigidgrasp/control.hpp"
#include "rigidgrasp/sim.hpp"
#include "rigidgrasp/verify.hpp"
