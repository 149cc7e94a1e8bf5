#pragma once

#include "jacobi/errors.hpp"
#include "jacobi/operator.hpp"
#include "jacobi/eigensolve.hpp"
#include "jacobi/polynomials.hpp"
#include "jacobi/measures.hpp"
#include "jacobi/randomness.hpp"
#include "jacobi/experiments.hpp"
