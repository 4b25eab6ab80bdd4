#pragma once

#include "aspis/aggregation.hpp"
#include "aspis/analysis.hpp"
#include "aspis/assignment.hpp"
#include "aspis/attacks.hpp"
#include "aspis/combinatorics.hpp"
#include "aspis/detection.hpp"
#include "aspis/report.hpp"
#include "aspis/rng.hpp"
#include "aspis/training.hpp"
