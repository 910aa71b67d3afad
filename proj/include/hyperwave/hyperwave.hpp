#pragma once

#include "hyperwave/core.hpp"
#include "hyperwave/quadrature.hpp"
#include "hyperwave/rng.hpp"
#include "hyperwave/spectral.hpp"
#include "hyperwave/wavekernel.hpp"
#include "hyperwave/condition.hpp"
#include "hyperwave/chaosnorm.hpp"
#include "hyperwave/noise.hpp"
#include "hyperwave/sweep.hpp"
#include "hyperwave/io.hpp"
