#pragma once

#include "bsec/errors.hpp"
#include "bsec/rng.hpp"
#include "bsec/core.hpp"
#include "bsec/policies.hpp"
#include "bsec/analytic.hpp"
#include "bsec/dp.hpp"
#include "bsec/oracle.hpp"
#include "bsec/montecarlo.hpp"
