#pragma once

#include "qtransport/analysis.hpp"
#include "qtransport/core.hpp"
#include "qtransport/evolve.hpp"
#include "qtransport/models.hpp"
#include "qtransport/observables.hpp"
#include "qtransport/protocols.hpp"
#include "qtransport/spectrum.hpp"
#include "qtransport/state.hpp"
#include "qtransport/sweep.hpp"
