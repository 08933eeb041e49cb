#pragma once

#include "wt/analysis.hpp"
#include "wt/datasets.hpp"
#include "wt/io.hpp"
#include "wt/localization.hpp"
#include "wt/localized_measure.hpp"
#include "wt/meanshift.hpp"
#include "wt/metric_space.hpp"
#include "wt/ot.hpp"
#include "wt/parallel.hpp"
#include "wt/stability.hpp"
#include "wt/transform.hpp"
