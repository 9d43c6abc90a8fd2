#pragma once

#include "spillcast/carrycap.hpp"
#include "spillcast/config.hpp"
#include "spillcast/date.hpp"
#include "spillcast/epimodel.hpp"
#include "spillcast/error.hpp"
#include "spillcast/eval.hpp"
#include "spillcast/grid.hpp"
#include "spillcast/ingest.hpp"
#include "spillcast/io.hpp"
#include "spillcast/onset.hpp"
#include "spillcast/pipeline.hpp"
#include "spillcast/r0.hpp"
#include "spillcast/series.hpp"
#include "spillcast/severity.hpp"
#include "spillcast/trend.hpp"
#include "spillcast/weathercast.hpp"
