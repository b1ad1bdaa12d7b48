#pragma once

// Umbrella header for the numq data quality library.

#include "numq/config.hpp"
#include "numq/dataset.hpp"
#include "numq/detectors.hpp"
#include "numq/digest.hpp"
#include "numq/error.hpp"
#include "numq/expression.hpp"
#include "numq/findings.hpp"
#include "numq/gate.hpp"
#include "numq/inject.hpp"
#include "numq/io.hpp"
#include "numq/metrics.hpp"
#include "numq/policy.hpp"
#include "numq/reference.hpp"
#include "numq/report.hpp"
#include "numq/rules.hpp"
#include "numq/score.hpp"
#include "numq/time.hpp"
