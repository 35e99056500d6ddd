#pragma once

#include "pftl/count_table.hpp"
#include "pftl/errors.hpp"
#include "pftl/formula.hpp"
#include "pftl/formula_parser.hpp"
#include "pftl/graph.hpp"
#include "pftl/interval_set.hpp"
#include "pftl/linalg.hpp"
#include "pftl/model.hpp"
#include "pftl/model_io.hpp"
#include "pftl/numerical.hpp"
#include "pftl/poisson.hpp"
#include "pftl/satint.hpp"
#include "pftl/simulation.hpp"
#include "pftl/sprt.hpp"
#include "pftl/state_set.hpp"
#include "pftl/statistical.hpp"
