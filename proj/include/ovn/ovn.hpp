#pragma once

#include "ovn/data.hpp"
#include "ovn/error.hpp"
#include "ovn/kernel_solver.hpp"
#include "ovn/kernels.hpp"
#include "ovn/kkt.hpp"
#include "ovn/linear_solver.hpp"
#include "ovn/majorization.hpp"
#include "ovn/model.hpp"
#include "ovn/model_selection.hpp"
#include "ovn/persistence.hpp"
#include "ovn/predict.hpp"
#include "ovn/synth.hpp"
