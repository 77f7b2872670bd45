#pragma once

#include "cohort.hpp"
#include "cycle.hpp"
#include "design.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "matfun3.hpp"
#include "plant.hpp"
#include "population.hpp"
#include "sim.hpp"
