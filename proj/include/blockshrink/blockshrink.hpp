#pragma once

#include "convergence.hpp"
#include "discriminant.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "matrix.hpp"
#include "moments.hpp"
#include "parallel.hpp"
#include "risk.hpp"
#include "rng.hpp"
#include "sampling.hpp"
#include "special.hpp"
