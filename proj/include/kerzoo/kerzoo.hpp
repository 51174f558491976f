#pragma once

#include "kerzoo/random.hpp"
#include "kerzoo/vector_ops.hpp"
#include "kerzoo/legendre_kernel.hpp"
#include "kerzoo/perturbation.hpp"
#include "kerzoo/objectives.hpp"
#include "kerzoo/zo_estimators.hpp"
#include "kerzoo/optimizers.hpp"
#include "kerzoo/bias_lab.hpp"
#include "kerzoo/config.hpp"
#include "kerzoo/harness.hpp"
