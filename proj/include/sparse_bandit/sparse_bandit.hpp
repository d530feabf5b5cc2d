#pragma once

#include "errors.hpp"
#include "types.hpp"
#include "covariance.hpp"
#include "confidence.hpp"
#include "regressors.hpp"
#include "selection.hpp"
#include "policies.hpp"
#include "environment.hpp"
#include "harness.hpp"
#include "config.hpp"
#include "io.hpp"
#include "cli.hpp"
#include "selftest.hpp"
