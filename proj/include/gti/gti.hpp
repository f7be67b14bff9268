#pragma once

#include <gti/error.hpp>
#include <gti/rational.hpp>
#include <gti/tally.hpp>
#include <gti/truth_stats.hpp>
#include <gti/forward_model.hpp>
#include <gti/trio_solver.hpp>
#include <gti/independence.hpp>
#include <gti/regressors.hpp>
#include <gti/simulate.hpp>
#include <gti/fixtures.hpp>
#include <gti/json_io.hpp>
