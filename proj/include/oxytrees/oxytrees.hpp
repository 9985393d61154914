#pragma once

#include "oxytrees/bench.hpp"
#include "oxytrees/dataset.hpp"
#include "oxytrees/eigen.hpp"
#include "oxytrees/errors.hpp"
#include "oxytrees/evaluation.hpp"
#include "oxytrees/forest.hpp"
#include "oxytrees/impurity.hpp"
#include "oxytrees/leaf_models.hpp"
#include "oxytrees/matrix.hpp"
#include "oxytrees/matrix_io.hpp"
#include "oxytrees/metrics.hpp"
#include "oxytrees/parallel.hpp"
#include "oxytrees/random.hpp"
#include "oxytrees/serialization.hpp"
#include "oxytrees/tree.hpp"
