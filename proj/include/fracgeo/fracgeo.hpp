#pragma once

#include "capacity.hpp"
#include "config.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "functional.hpp"
#include "grid.hpp"
#include "kernel.hpp"
#include "lp.hpp"
#include "maxflow.hpp"
#include "mollifier.hpp"
#include "report.hpp"
#include "shape.hpp"
#include "summation.hpp"
