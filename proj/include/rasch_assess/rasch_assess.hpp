#ifndef RASCH_ASSESS_RASCH_ASSESS_HPP
#define RASCH_ASSESS_RASCH_ASSESS_HPP

#include "rasch_assess/assessment.hpp"
#include "rasch_assess/calibration.hpp"
#include "rasch_assess/coded_matrix.hpp"
#include "rasch_assess/csv.hpp"
#include "rasch_assess/errors.hpp"
#include "rasch_assess/factor_catalog.hpp"
#include "rasch_assess/fit.hpp"
#include "rasch_assess/pipeline.hpp"
#include "rasch_assess/ranking_report.hpp"
#include "rasch_assess/rating_scale.hpp"
#include "rasch_assess/wright_map.hpp"

#endif  // RASCH_ASSESS_RASCH_ASSESS_HPP
