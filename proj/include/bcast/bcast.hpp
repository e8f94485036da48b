#pragma once

#include "bcast/error.hpp"
#include "bcast/rational.hpp"
#include "bcast/network.hpp"
#include "bcast/interference.hpp"
#include "bcast/simplex.hpp"
#include "bcast/capacity.hpp"
#include "bcast/policies.hpp"
#include "bcast/simulation.hpp"
#include "bcast/scenario.hpp"
#include "bcast/experiment.hpp"
