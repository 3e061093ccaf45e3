#pragma once

#include "lcf/blocknest.hpp"
#include "lcf/field.hpp"
#include "lcf/fpp.hpp"
#include "lcf/grid.hpp"
#include "lcf/harness.hpp"
#include "lcf/io.hpp"
#include "lcf/measure.hpp"
#include "lcf/path.hpp"
#include "lcf/percolation.hpp"
#include "lcf/random.hpp"
