#pragma once

#include "cstarkit/errors.hpp"
#include "cstarkit/matrix.hpp"
#include "cstarkit/subalgebra.hpp"
#include "cstarkit/expectation.hpp"
#include "cstarkit/basic_construction.hpp"
#include "cstarkit/perturbation.hpp"
#include "cstarkit/scenarios.hpp"
#include "cstarkit/json_io.hpp"
