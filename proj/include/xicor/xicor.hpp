// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "xicor/cdf.hpp"
#include "xicor/compensated_sum.hpp"
#include "xicor/csv.hpp"
#include "xicor/errors.hpp"
#include "xicor/estimator.hpp"
#include "xicor/inference.hpp"
#include "xicor/kernels.hpp"
#include "xicor/quadrature.hpp"
#include "xicor/rng.hpp"
#include "xicor/sample.hpp"
#include "xicor/simulate.hpp"
