#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace segforge {

// Standard normal CDF, computed as erfc(-z / sqrt 2) / 2.
double normal_cdf(double z);
// Inverse of normal_cdf for p in (0, 1).
double normal_quantile(double p);

enum class Alternative { TwoSided, Greater, Less };
std::string_view to_string(Alternative alternative);

struct ZTestResult {
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double p_hat = 0.0;
  double pi0 = 0.5;
  Alternative alternative = Alternative::TwoSided;
  double z = 0.0;
  double p_value = 1.0;
  double ci_level = 0.99;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  bool h0_rejected = false;
};

struct ZTestOptions {
  double ci_level = 0.99;
  double significance = 0.01;
  std::int64_t min_trials = 30;
};

// z = (p_hat - pi0) / sqrt(pi0 (1 - pi0) / n) with a Wald interval
// p_hat -/+ z_crit sqrt(p_hat (1 - p_hat) / n). One-sided alternatives get a
// one-sided interval closed at 0 or 1. Throws InsufficientSample when
// n < min_trials.
ZTestResult proportion_ztest(std::int64_t successes, std::int64_t trials, double pi0,
                             Alternative alternative, const ZTestOptions& options = {});

// Five decimals; anything below 1e-5 prints as "0.00000".
std::string format_p_value(double p);

struct ContingencyTable2x2 {
  std::int64_t fun_learning = 0;
  std::int64_t fun_not_learning = 0;
  std::int64_t not_fun_learning = 0;
  std::int64_t not_fun_not_learning = 0;

  std::int64_t total() const {
    return fun_learning + fun_not_learning + not_fun_learning + not_fun_not_learning;
  }
  bool operator==(const ContingencyTable2x2&) const = default;
};

struct OutcomePair {
  bool fun = false;
  bool learned = false;
};

ContingencyTable2x2 crosstab(const std::vector<OutcomePair>& sessions);

// One survey report: the fun answer and the pre/post exam bits for the
// material played.
struct SurveyReport {
  bool fun = false;
  int pre = 0;
  int post = 0;
};

// JSON lines with fields "fun" (bool), "pre" and "post" (0/1).
std::vector<SurveyReport> read_survey_reports(std::istream& in);

struct SurveyAnalysis {
  std::int64_t reports = 0;
  std::int64_t fun_reports = 0;
  std::int64_t learning_eligible = 0;  // no prior knowledge (pre == 0)
  std::int64_t improved = 0;           // eligible and post == 1
  std::vector<ZTestResult> enjoyment;  // two-sided, greater, less
  std::vector<ZTestResult> learning;
  ContingencyTable2x2 table;
};

SurveyAnalysis analyze_survey(const std::vector<SurveyReport>& reports,
                              const ZTestOptions& options = {});
std::string survey_report_text(const SurveyAnalysis& analysis);
std::string survey_report_csv(const SurveyAnalysis& analysis);

}  // namespace segforge
