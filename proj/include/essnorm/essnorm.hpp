#pragma once

#include "essnorm/multi_index.hpp"
#include "essnorm/lattice.hpp"
#include "essnorm/weights.hpp"
#include "essnorm/submodule.hpp"
#include "essnorm/shiftops.hpp"
#include "essnorm/parallel.hpp"
#include "essnorm/schatten.hpp"
#include "essnorm/decomp.hpp"
#include "essnorm/samuel.hpp"
#include "essnorm/oracle.hpp"
#include "essnorm/io.hpp"
