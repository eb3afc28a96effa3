#pragma once

#include "survgen/baselines.hpp"
#include "survgen/censoring.hpp"
#include "survgen/csv.hpp"
#include "survgen/cure.hpp"
#include "survgen/dependence.hpp"
#include "survgen/error.hpp"
#include "survgen/formula.hpp"
#include "survgen/models.hpp"
#include "survgen/rng.hpp"
#include "survgen/scenario.hpp"
#include "survgen/special.hpp"
#include "survgen/table.hpp"
#include "survgen/verify.hpp"
#include "survgen/check.hpp"
