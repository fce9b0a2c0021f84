#pragma once

#include "kickshift/errors.hpp"
#include "kickshift/axis.hpp"
#include "kickshift/grid.hpp"
#include "kickshift/spectral.hpp"
#include "kickshift/potential.hpp"
#include "kickshift/wavefield.hpp"
#include "kickshift/pulse.hpp"
#include "kickshift/models.hpp"
#include "kickshift/solver.hpp"
#include "kickshift/retrieval.hpp"
#include "kickshift/checksum.hpp"
#include "kickshift/config.hpp"
#include "kickshift/io.hpp"
#include "kickshift/manifest.hpp"
#include "kickshift/presets.hpp"
