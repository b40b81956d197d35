#pragma once

#include "ddc/datagen.hpp"
#include "ddc/error.hpp"
#include "ddc/experiment.hpp"
#include "ddc/gaussian.hpp"
#include "ddc/logistic.hpp"
#include "ddc/ml_solver.hpp"
#include "ddc/model.hpp"
#include "ddc/numeric.hpp"
#include "ddc/phase_transition.hpp"
#include "ddc/svm_solver.hpp"
#include "ddc/trainers.hpp"
#include "ddc/version.hpp"
