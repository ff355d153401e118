#pragma once

#include "bfv/analytics.hpp"
#include "bfv/baseline.hpp"
#include "bfv/domain.hpp"
#include "bfv/linprog.hpp"
#include "bfv/placement.hpp"
#include "bfv/scenario.hpp"
#include "bfv/validation.hpp"
#include "bfv/workload.hpp"
