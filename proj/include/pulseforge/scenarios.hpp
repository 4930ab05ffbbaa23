#pragma once

#include "pulseforge/scenarios/pdc.hpp"
#include "pulseforge/scenarios/qubit.hpp"
#include "pulseforge/scenarios/snap.hpp"
#include "pulseforge/scenarios/transmon.hpp"
