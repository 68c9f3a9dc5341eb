#pragma once

#include <string>

#include <json.hpp>

#include "doateleop/evaluation.hpp"
#include "doateleop/trial.hpp"

namespace doateleop {

nlohmann::json report_to_json(const TrialReport& r);
nlohmann::json suite_to_json(const SuiteReport& s);

/// Plain-text tables with the sensitivity/specificity/precision/accuracy
/// columns first; undefined metrics print as "-".
std::string format_table(const TrialReport& r);
std::string format_table(const SuiteReport& s);

/// One row per evaluated sample: t, p, dRc, g_x, g_y, nu_x, nu_y.
std::string eval_samples_csv(const TrialLog& log);
/// One row per trial with the headline metrics.
std::string suite_csv(const SuiteReport& s);

}  // namespace doateleop
