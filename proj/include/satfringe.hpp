#pragma once

// Single-include convenience header for the whole library.

#include "satfringe/constants.hpp"
#include "satfringe/errors.hpp"
#include "satfringe/histogram.hpp"
#include "satfringe/io.hpp"
#include "satfringe/kinematics.hpp"
#include "satfringe/levmar.hpp"
#include "satfringe/optical.hpp"
#include "satfringe/peak_fit.hpp"
#include "satfringe/photon_sim.hpp"
#include "satfringe/pipeline.hpp"
#include "satfringe/presets.hpp"
#include "satfringe/quadrature.hpp"
#include "satfringe/ranging.hpp"
#include "satfringe/rng.hpp"
#include "satfringe/version.hpp"
#include "satfringe/visibility.hpp"
#include "satfringe/wavepacket.hpp"
