#pragma once

#include "hamverify/basis.hpp"
#include "hamverify/block.hpp"
#include "hamverify/criteria.hpp"
#include "hamverify/errors.hpp"
#include "hamverify/linalg.hpp"
#include "hamverify/matrix_market.hpp"
#include "hamverify/operator.hpp"
#include "hamverify/plate.hpp"
#include "hamverify/plate_config.hpp"
#include "hamverify/polynomial.hpp"
#include "hamverify/random.hpp"
#include "hamverify/relative_bounds.hpp"
