#pragma once

#include "suspense/agreement.hpp"
#include "suspense/annotation.hpp"
#include "suspense/continuation.hpp"
#include "suspense/correlation.hpp"
#include "suspense/embedding.hpp"
#include "suspense/error.hpp"
#include "suspense/measure_io.hpp"
#include "suspense/measures.hpp"
#include "suspense/plot.hpp"
#include "suspense/story.hpp"
#include "suspense/turning_points.hpp"
