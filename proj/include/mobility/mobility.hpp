#pragma once

// Umbrella header: the whole library.

#include "mobility/activity.hpp"
#include "mobility/anchors.hpp"
#include "mobility/calendar.hpp"
#include "mobility/config.hpp"
#include "mobility/csv.hpp"
#include "mobility/error.hpp"
#include "mobility/geo.hpp"
#include "mobility/indicators.hpp"
#include "mobility/ingest.hpp"
#include "mobility/keys.hpp"
#include "mobility/parallel.hpp"
#include "mobility/pca.hpp"
#include "mobility/pipeline.hpp"
#include "mobility/ses.hpp"
#include "mobility/spatial.hpp"
#include "mobility/synth.hpp"
