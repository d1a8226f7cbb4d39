#pragma once

#include "suzz/core.hpp"
#include "suzz/diagnostics.hpp"
#include "suzz/efficiency.hpp"
#include "suzz/events.hpp"
#include "suzz/experiment.hpp"
#include "suzz/flow.hpp"
#include "suzz/io.hpp"
#include "suzz/quadrature.hpp"
#include "suzz/sampler.hpp"
#include "suzz/speed.hpp"
#include "suzz/targets.hpp"
#include "suzz/transform1d.hpp"
