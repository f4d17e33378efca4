#pragma once

#include "specinv/algebra.hpp"
#include "specinv/algebra_json.hpp"
#include "specinv/errors.hpp"
#include "specinv/expression.hpp"
#include "specinv/field.hpp"
#include "specinv/gf2.hpp"
#include "specinv/grid.hpp"
#include "specinv/parallel.hpp"
#include "specinv/persistence.hpp"
#include "specinv/random_fields.hpp"
#include "specinv/rational.hpp"
#include "specinv/reduction_lab.hpp"
#include "specinv/spectral.hpp"
