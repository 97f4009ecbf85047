#include "segforge/stats.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>
#include <nlohmann/json.hpp>

#include "segforge/error.hpp"
#include "segforge/text.hpp"

namespace segforge {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("normal_quantile needs p in (0, 1)");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

std::string_view to_string(Alternative alternative) {
  switch (alternative) {
    case Alternative::TwoSided: return "two-sided";
    case Alternative::Greater: return "greater";
    case Alternative::Less: return "less";
  }
  return "?";
}

ZTestResult proportion_ztest(std::int64_t successes, std::int64_t trials, double pi0,
                             Alternative alternative, const ZTestOptions& options) {
  if (trials < options.min_trials) {
    throw InsufficientSample("proportion z-test needs n >= " + std::to_string(options.min_trials) +
                             ", got " + std::to_string(trials));
  }
  if (successes < 0 || successes > trials) {
    throw Error("successes must lie in [0, n]");
  }
  if (!(pi0 > 0.0 && pi0 < 1.0)) throw Error("null proportion must lie in (0, 1)");

  ZTestResult r;
  r.successes = successes;
  r.trials = trials;
  r.pi0 = pi0;
  r.alternative = alternative;
  r.ci_level = options.ci_level;

  const double n = static_cast<double>(trials);
  r.p_hat = static_cast<double>(successes) / n;
  r.z = (r.p_hat - pi0) / std::sqrt(pi0 * (1.0 - pi0) / n);
  const double se = std::sqrt(r.p_hat * (1.0 - r.p_hat) / n);
  const double miss = 1.0 - options.ci_level;

  switch (alternative) {
    case Alternative::TwoSided: {
      r.p_value = std::min(1.0, 2.0 * normal_cdf(-std::abs(r.z)));
      const double crit = normal_quantile(1.0 - miss / 2.0);
      r.ci_lo = r.p_hat - crit * se;
      r.ci_hi = r.p_hat + crit * se;
      break;
    }
    case Alternative::Greater: {
      r.p_value = normal_cdf(-r.z);
      r.ci_lo = r.p_hat - normal_quantile(1.0 - miss) * se;
      r.ci_hi = 1.0;
      break;
    }
    case Alternative::Less: {
      r.p_value = normal_cdf(r.z);
      r.ci_lo = 0.0;
      r.ci_hi = r.p_hat + normal_quantile(1.0 - miss) * se;
      break;
    }
  }
  r.h0_rejected = r.p_value < options.significance;
  return r;
}

std::string format_p_value(double p) {
  if (p < 1e-5) return "0.00000";
  return format_fixed(p, 5);
}

ContingencyTable2x2 crosstab(const std::vector<OutcomePair>& sessions) {
  ContingencyTable2x2 t;
  for (const auto& s : sessions) {
    if (s.fun) {
      ++(s.learned ? t.fun_learning : t.fun_not_learning);
    } else {
      ++(s.learned ? t.not_fun_learning : t.not_fun_not_learning);
    }
  }
  return t;
}

std::vector<SurveyReport> read_survey_reports(std::istream& in) {
  std::vector<SurveyReport> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim_view(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      SurveyReport r;
      r.fun = j.at("fun").get<bool>();
      r.pre = j.at("pre").get<int>();
      r.post = j.at("post").get<int>();
      if ((r.pre != 0 && r.pre != 1) || (r.post != 0 && r.post != 1)) {
        throw MalformedRecord("exam bits must be 0 or 1");
      }
      out.push_back(r);
    } catch (const nlohmann::json::exception& e) {
      throw MalformedRecord("survey line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

SurveyAnalysis analyze_survey(const std::vector<SurveyReport>& reports,
                              const ZTestOptions& options) {
  SurveyAnalysis a;
  std::vector<OutcomePair> pairs;
  for (const auto& r : reports) {
    ++a.reports;
    if (r.fun) ++a.fun_reports;
    if (r.pre != 0) continue;
    ++a.learning_eligible;
    if (r.post == 1) ++a.improved;
    pairs.push_back(OutcomePair{r.fun, r.post == 1});
  }
  for (auto alt : {Alternative::TwoSided, Alternative::Greater, Alternative::Less}) {
    a.enjoyment.push_back(proportion_ztest(a.fun_reports, a.reports, 0.5, alt, options));
    a.learning.push_back(proportion_ztest(a.improved, a.learning_eligible, 0.5, alt, options));
  }
  a.table = crosstab(pairs);
  return a;
}

namespace {

std::string pad(std::string cell, std::size_t width) {
  if (cell.size() < width) cell.resize(width, ' ');
  return cell;
}

void table_row(std::ostringstream& out, const std::string& label,
               const std::vector<std::string>& cells) {
  std::string line = "  " + pad(label, 21);
  for (const auto& c : cells) line += pad(c, 14);
  line.erase(line.find_last_not_of(' ') + 1);
  out << line << '\n';
}

void ztest_table(std::ostringstream& out, const std::string& title,
                 const std::vector<ZTestResult>& tests) {
  const auto& first = tests.front();
  out << title << " (x=" << first.successes << ", n=" << first.trials
      << ", p_hat=" << format_fixed(first.p_hat, 3) << ", z=" << format_fixed(first.z, 2) << ")\n";
  std::vector<std::string> alt, p, ci, status;
  for (const auto& t : tests) {
    alt.emplace_back(to_string(t.alternative));
    p.push_back(format_p_value(t.p_value));
    ci.push_back(format_fixed(t.ci_lo, 2) + "-" + format_fixed(t.ci_hi, 2));
    status.emplace_back(t.h0_rejected ? "Rejected" : "Not rejected");
  }
  table_row(out, "H0: pi = " + format_fixed(first.pi0, 1) + " vs.", alt);
  table_row(out, "p-value", p);
  table_row(out, std::to_string(std::lround(first.ci_level * 100)) + "% conf. interval", ci);
  table_row(out, "H0 status", status);
  out << '\n';
}

}  // namespace

std::string survey_report_text(const SurveyAnalysis& a) {
  std::ostringstream out;
  ztest_table(out, "Z-test on proportion of gained enjoyment", a.enjoyment);
  ztest_table(out, "Z-test on proportion of improved learning", a.learning);
  out << "Learning outcome vs. affective experience (n=" << a.table.total() << ")\n";
  table_row(out, "", {"NotLearning", "Learning"});
  table_row(out, "NotFun", {std::to_string(a.table.not_fun_not_learning),
                            std::to_string(a.table.not_fun_learning)});
  table_row(out, "Fun", {std::to_string(a.table.fun_not_learning),
                         std::to_string(a.table.fun_learning)});
  return out.str();
}

std::string survey_report_csv(const SurveyAnalysis& a) {
  std::ostringstream out;
  out << "test,alternative,x,n,p_hat,z,p_value,ci_lo,ci_hi,h0_rejected\n";
  const auto rows = [&](const char* name, const std::vector<ZTestResult>& tests) {
    for (const auto& t : tests) {
      out << name << ',' << to_string(t.alternative) << ',' << t.successes << ',' << t.trials << ','
          << format_double(t.p_hat) << ',' << format_double(t.z) << ','
          << format_double(t.p_value) << ',' << format_double(t.ci_lo) << ','
          << format_double(t.ci_hi) << ',' << (t.h0_rejected ? 1 : 0) << '\n';
    }
  };
  rows("enjoyment", a.enjoyment);
  rows("learning", a.learning);
  out << "crosstab,fun_learning," << a.table.fun_learning << ",,,,,,,\n";
  out << "crosstab,fun_not_learning," << a.table.fun_not_learning << ",,,,,,,\n";
  out << "crosstab,not_fun_learning," << a.table.not_fun_learning << ",,,,,,,\n";
  out << "crosstab,not_fun_not_learning," << a.table.not_fun_not_learning << ",,,,,,,\n";
  return out.str();
}

}  // namespace segforge
