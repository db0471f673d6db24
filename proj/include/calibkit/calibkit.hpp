#pragma once

#include "calibkit/core.hpp"
#include "calibkit/error.hpp"
#include "calibkit/estimators.hpp"
#include "calibkit/experiment.hpp"
#include "calibkit/hypothesis.hpp"
#include "calibkit/kernel_grammar.hpp"
#include "calibkit/kernels.hpp"
#include "calibkit/numerics.hpp"
#include "calibkit/random.hpp"
#include "calibkit/synth.hpp"
