#pragma once

#include "pinvpert/decomposition.hpp"
#include "pinvpert/errors.hpp"
#include "pinvpert/generators.hpp"
#include "pinvpert/hypothesis.hpp"
#include "pinvpert/matrix.hpp"
#include "pinvpert/matrix_market.hpp"
#include "pinvpert/pinv.hpp"
#include "pinvpert/random.hpp"
#include "pinvpert/report.hpp"
#include "pinvpert/reverse_order.hpp"
#include "pinvpert/update.hpp"
#include "pinvpert/verify.hpp"
