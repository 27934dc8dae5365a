#pragma once

// Umbrella header.

#include "t2geo/calculus.hpp"
#include "t2geo/connection.hpp"
#include "t2geo/dynamics.hpp"
#include "t2geo/errors.hpp"
#include "t2geo/expr.hpp"
#include "t2geo/io.hpp"
#include "t2geo/lagrangian.hpp"
#include "t2geo/point.hpp"
#include "t2geo/random.hpp"
#include "t2geo/riemann.hpp"
#include "t2geo/semispray.hpp"
#include "t2geo/taylor.hpp"
#include "t2geo/transform.hpp"
#include "t2geo/verify.hpp"
