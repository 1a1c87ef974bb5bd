#pragma once

#include "geoweak/datamodel.hpp"
#include "geoweak/errors.hpp"
#include "geoweak/evaluator.hpp"
#include "geoweak/geocluster.hpp"
#include "geoweak/geometry.hpp"
#include "geoweak/harness.hpp"
#include "geoweak/parsers.hpp"
#include "geoweak/report.hpp"
#include "geoweak/rng.hpp"
#include "geoweak/splitter.hpp"
#include "geoweak/teachersim.hpp"
