#pragma once

#include "svmedge/bench.hpp"
#include "svmedge/edge.hpp"
#include "svmedge/errors.hpp"
#include "svmedge/image.hpp"
#include "svmedge/kernels.hpp"
#include "svmedge/model_io.hpp"
#include "svmedge/svm.hpp"
#include "svmedge/synth.hpp"
