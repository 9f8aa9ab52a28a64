#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "planecast/task.hpp"

namespace planecast::analytics {

struct Row {
  std::string subject_id;
  TrialRecord trial;
};

using TrialTable = std::vector<Row>;

enum class Factor { Technique, Radius, Condition, Position };
enum class Measure { Mt, D, T };

Factor factor_from_string(std::string_view s);
Measure measure_from_string(std::string_view s);
std::string_view to_string(Factor f);
std::string_view to_string(Measure m);

/// Level label of a trial under a factor, e.g. "pivot", "52", "speed", "7".
std::string level_of(const TrialRecord& r, Factor f);
double measure_of(const TrialRecord& r, Measure m);

struct LevelSummary {
  std::string level;
  /// Mean of per-subject means.
  double mean = 0.0;
  std::size_t subjects = 0;
  std::size_t trials = 0;
};

/// Levels absent from the table are simply not listed. Levels come out in
/// natural order (numeric levels sorted numerically).
std::vector<LevelSummary> summarize(const TrialTable& table, Factor f, Measure m);

/// subjects x levels matrix of per-subject cell means. Subjects missing any
/// level are dropped and listed in `excluded`.
struct SubjectMatrix {
  std::vector<std::string> subjects;
  std::vector<std::string> levels;
  std::vector<std::vector<double>> values;
  std::vector<std::string> excluded;
};
SubjectMatrix subject_level_means(const TrialTable& table, Factor f, Measure m);

struct AnovaResult {
  double f = 0.0;
  int df1 = 0;
  int df2 = 0;
  double p = 1.0;
  double ss_treatment = 0.0;
  double ss_error = 0.0;
};

/// One-way repeated-measures ANOVA without sphericity correction.
/// `matrix` is n subjects x k levels, n >= 2, k >= 2, rectangular.
AnovaResult rm_anova_oneway(const std::vector<std::vector<double>>& matrix);

/// CDF of the F distribution with (df1, df2) degrees of freedom; +inf gives 1.
double f_cdf(double x, double df1, double df2);

/// Reads the trial CSV written by write_trials_csv. An optional leading
/// subject_id column is honoured; otherwise every row gets `default_subject`.
TrialTable read_trials_csv(std::istream& in, const std::string& default_subject);

/// Human-readable report: per-level means and, with >= 2 complete subjects,
/// the RM-ANOVA line.
std::string report(const TrialTable& table, Factor f, Measure m);

/// Columns: factor,measure,level,mean,subjects,trials
void write_summary_csv(std::ostream& out, Factor f, Measure m,
                       const std::vector<LevelSummary>& levels);

}  // namespace planecast::analytics
