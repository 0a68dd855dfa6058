#pragma once

#include "fpt/closed_form.hpp"
#include "fpt/commands.hpp"
#include "fpt/config.hpp"
#include "fpt/csv.hpp"
#include "fpt/errors.hpp"
#include "fpt/estimators.hpp"
#include "fpt/jump_law.hpp"
#include "fpt/oracle.hpp"
#include "fpt/parallel.hpp"
#include "fpt/path_sim.hpp"
#include "fpt/quadrature.hpp"
#include "fpt/random.hpp"
#include "fpt/validation.hpp"
