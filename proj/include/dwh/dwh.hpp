#pragma once

#include "dwh/errors.hpp"
#include "dwh/model.hpp"
#include "dwh/rk4.hpp"
#include "dwh/timeseries.hpp"
#include "dwh/meanfield.hpp"
#include "dwh/perturbation.hpp"
#include "dwh/quantum.hpp"
#include "dwh/experiments.hpp"
#include "dwh/config.hpp"
#include "dwh/io.hpp"
