#pragma once

#include "ordfdr/config.hpp"
#include "ordfdr/csv.hpp"
#include "ordfdr/harness.hpp"
#include "ordfdr/lars.hpp"
#include "ordfdr/metrics.hpp"
#include "ordfdr/normal_tail.hpp"
#include "ordfdr/random.hpp"
#include "ordfdr/rules.hpp"
#include "ordfdr/series.hpp"
#include "ordfdr/simgen.hpp"
