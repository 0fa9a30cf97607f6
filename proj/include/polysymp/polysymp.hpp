#pragma once

// Umbrella header.

#include "polysymp/quat_algebra.hpp"
#include "polysymp/rng.hpp"
#include "polysymp/torus_mesh.hpp"
#include "polysymp/whitney.hpp"
#include "polysymp/moment_map.hpp"
#include "polysymp/flow.hpp"
#include "polysymp/reconstruct.hpp"
#include "polysymp/serialize.hpp"
#include "polysymp/experiment.hpp"
