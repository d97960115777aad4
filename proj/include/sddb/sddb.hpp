#pragma once

// Umbrella header for the spectral-density-driven bootstrap library.

#include "sddb/bootstrap.hpp"
#include "sddb/errors.hpp"
#include "sddb/factorization.hpp"
#include "sddb/fft.hpp"
#include "sddb/innovations.hpp"
#include "sddb/io.hpp"
#include "sddb/rng.hpp"
#include "sddb/simharness.hpp"
#include "sddb/spectral.hpp"
#include "sddb/spectral_density.hpp"
#include "sddb/statistics.hpp"
