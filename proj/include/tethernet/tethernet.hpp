#pragma once

// Umbrella header for the full pipeline.

#include "tethernet/aiming.hpp"
#include "tethernet/assembly.hpp"
#include "tethernet/capture.hpp"
#include "tethernet/config.hpp"
#include "tethernet/control.hpp"
#include "tethernet/episode.hpp"
#include "tethernet/forces.hpp"
#include "tethernet/harness.hpp"
#include "tethernet/hull.hpp"
#include "tethernet/io.hpp"
#include "tethernet/mlp.hpp"
#include "tethernet/policy.hpp"
#include "tethernet/rng.hpp"
#include "tethernet/simulator.hpp"
#include "tethernet/surrogate.hpp"
#include "tethernet/vec3.hpp"
