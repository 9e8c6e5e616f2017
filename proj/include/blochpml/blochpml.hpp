#pragma once

// Umbrella header.

#include "blochpml/assembly.hpp"
#include "blochpml/bloch.hpp"
#include "blochpml/branch.hpp"
#include "blochpml/cellsolve.hpp"
#include "blochpml/contour.hpp"
#include "blochpml/errors.hpp"
#include "blochpml/experiment.hpp"
#include "blochpml/mesh.hpp"
#include "blochpml/oracle.hpp"
#include "blochpml/pml_bound.hpp"
#include "blochpml/source.hpp"
#include "blochpml/surface.hpp"
