// Convenience umbrella header.
#pragma once

#include "coop/actors.hpp"
#include "coop/assignment.hpp"
#include "coop/association.hpp"
#include "coop/geo.hpp"
#include "coop/metrics.hpp"
#include "coop/pipeline.hpp"
#include "coop/scenario.hpp"
#include "coop/sensors.hpp"
#include "coop/tracker.hpp"
#include "coop/v2v.hpp"
