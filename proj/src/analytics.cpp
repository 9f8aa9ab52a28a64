#include "planecast/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

#include "planecast/wire.hpp"

namespace planecast::analytics {

Factor factor_from_string(std::string_view s) {
  if (s == "technique") return Factor::Technique;
  if (s == "radius") return Factor::Radius;
  if (s == "condition") return Factor::Condition;
  if (s == "position") return Factor::Position;
  throw std::invalid_argument("unknown factor '" + std::string(s) +
                              "' (expected technique|radius|condition|position)");
}

Measure measure_from_string(std::string_view s) {
  if (s == "mt") return Measure::Mt;
  if (s == "d") return Measure::D;
  if (s == "t") return Measure::T;
  throw std::invalid_argument("unknown measure '" + std::string(s) + "' (expected mt|d|t)");
}

std::string_view to_string(Factor f) {
  switch (f) {
    case Factor::Technique: return "technique";
    case Factor::Radius: return "radius";
    case Factor::Condition: return "condition";
    case Factor::Position: return "position";
  }
  return "?";
}

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::Mt: return "mt";
    case Measure::D: return "d";
    case Measure::T: return "t";
  }
  return "?";
}

std::string level_of(const TrialRecord& r, Factor f) {
  switch (f) {
    case Factor::Technique: return std::string(planecast::to_string(r.spec.technique));
    case Factor::Radius: return wire::format_number(r.spec.radius_cm);
    case Factor::Condition: return std::string(planecast::to_string(r.spec.condition));
    case Factor::Position: return std::to_string(r.spec.position_idx);
  }
  return {};
}

double measure_of(const TrialRecord& r, Measure m) {
  switch (m) {
    case Measure::Mt: return r.mt_ms;
    case Measure::D: return r.d_cm;
    case Measure::T: return r.t_px;
  }
  return 0.0;
}

namespace {

struct Cell {
  double sum = 0.0;
  std::size_t n = 0;
};

// level -> subject -> cell
using CellMap = std::map<std::string, std::map<std::string, Cell>>;

CellMap cells_of(const TrialTable& table, Factor f, Measure m) {
  CellMap cells;
  for (const Row& row : table) {
    Cell& c = cells[level_of(row.trial, f)][row.subject_id];
    c.sum += measure_of(row.trial, m);
    ++c.n;
  }
  return cells;
}

std::vector<std::string> ordered_levels(const CellMap& cells, Factor f) {
  std::vector<std::string> levels;
  for (const auto& [level, _] : cells) levels.push_back(level);
  if (f == Factor::Radius || f == Factor::Position) {
    std::sort(levels.begin(), levels.end(),
              [](const std::string& a, const std::string& b) { return std::stod(a) < std::stod(b); });
  }
  return levels;
}

}  // namespace

std::vector<LevelSummary> summarize(const TrialTable& table, Factor f, Measure m) {
  if (table.empty()) throw std::invalid_argument("summarize: table is empty");
  const CellMap cells = cells_of(table, f, m);
  std::vector<LevelSummary> out;
  for (const std::string& level : ordered_levels(cells, f)) {
    LevelSummary s;
    s.level = level;
    double sum_of_means = 0.0;
    for (const auto& [subject, cell] : cells.at(level)) {
      sum_of_means += cell.sum / static_cast<double>(cell.n);
      s.trials += cell.n;
      ++s.subjects;
    }
    s.mean = sum_of_means / static_cast<double>(s.subjects);
    out.push_back(std::move(s));
  }
  return out;
}

SubjectMatrix subject_level_means(const TrialTable& table, Factor f, Measure m) {
  const CellMap cells = cells_of(table, f, m);
  SubjectMatrix out;
  out.levels = ordered_levels(cells, f);

  std::vector<std::string> subjects;
  for (const Row& row : table) {
    if (std::find(subjects.begin(), subjects.end(), row.subject_id) == subjects.end()) {
      subjects.push_back(row.subject_id);
    }
  }
  std::sort(subjects.begin(), subjects.end());
  for (const std::string& subject : subjects) {
    std::vector<double> row;
    for (const std::string& level : out.levels) {
      const auto& by_subject = cells.at(level);
      const auto it = by_subject.find(subject);
      if (it == by_subject.end()) break;
      row.push_back(it->second.sum / static_cast<double>(it->second.n));
    }
    if (row.size() == out.levels.size()) {
      out.subjects.push_back(subject);
      out.values.push_back(std::move(row));
    } else {
      out.excluded.push_back(subject);
    }
  }
  return out;
}

AnovaResult rm_anova_oneway(const std::vector<std::vector<double>>& matrix) {
  const std::size_t n = matrix.size();
  if (n < 2) throw std::invalid_argument("rm_anova_oneway: need at least 2 subjects");
  const std::size_t k = matrix.front().size();
  if (k < 2) throw std::invalid_argument("rm_anova_oneway: need at least 2 levels");
  for (const auto& row : matrix) {
    if (row.size() != k) throw std::invalid_argument("rm_anova_oneway: ragged matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("rm_anova_oneway: non-finite cell");
    }
  }

  // Work on deviations from each subject's mean so large common offsets (MT in
  // ms, say) do not eat the precision of the sums of squares.
  std::vector<std::vector<long double>> dev(n, std::vector<long double>(k));
  long double grand = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double sum = 0.0L;
    for (double v : matrix[i]) sum += v;
    const long double mean = sum / static_cast<long double>(k);
    grand += mean;
    for (std::size_t j = 0; j < k; ++j) dev[i][j] = matrix[i][j] - mean;
  }
  grand /= static_cast<long double>(n);

  std::vector<long double> level_dev(k, 0.0L);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) level_dev[j] += dev[i][j];
    level_dev[j] /= static_cast<long double>(n);
  }

  long double dev_grand = 0.0L;  // zero up to rounding
  for (long double l : level_dev) dev_grand += l;
  dev_grand /= static_cast<long double>(k);

  AnovaResult r;
  long double ss_treatment = 0.0L, ss_error = 0.0L;
  for (long double l : level_dev) ss_treatment += (l - dev_grand) * (l - dev_grand);
  ss_treatment *= static_cast<long double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const long double resid = dev[i][j] - level_dev[j] + dev_grand;
      ss_error += resid * resid;
    }
  }
  r.ss_treatment = static_cast<double>(ss_treatment);
  r.ss_error = static_cast<double>(ss_error);

  r.df1 = static_cast<int>(k - 1);
  r.df2 = static_cast<int>((k - 1) * (n - 1));
  const double ms_treatment = static_cast<double>(ss_treatment / r.df1);
  const double ms_error = static_cast<double>(ss_error / r.df2);

  // Residuals that are pure rounding noise relative to the data count as zero.
  double scale = 0.0;
  for (const auto& row : matrix) {
    for (double v : row) scale = std::max(scale, static_cast<double>(std::abs(v - grand)));
  }
  const double noise = 1e-24 * scale * scale * static_cast<double>(n * k);
  const bool error_zero = r.ss_error <= noise;
  const bool treatment_zero = r.ss_treatment <= noise;

  if (error_zero && treatment_zero) {
    r.f = 0.0;
    r.p = 1.0;
  } else if (error_zero) {
    r.f = std::numeric_limits<double>::infinity();
    r.p = 0.0;
  } else {
    r.f = ms_treatment / ms_error;
    r.p = 1.0 - f_cdf(r.f, r.df1, r.df2);
  }
  return r;
}

double f_cdf(double x, double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0)) throw std::invalid_argument("f_cdf: df must be positive");
  if (std::isnan(x)) throw std::invalid_argument("f_cdf: x is NaN");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double z = df1 * x / (df1 * x + df2);
  return boost::math::ibeta(df1 / 2.0, df2 / 2.0, z);
}

// ---------------------------------------------------------------------------
// CSV input

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t lineno) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw std::runtime_error("line " + std::to_string(lineno) + ": bad number '" + s + "'");
  }
  return v;
}

int parse_int(const std::string& s, std::size_t lineno) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("line " + std::to_string(lineno) + ": bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

TrialTable read_trials_csv(std::istream& in, const std::string& default_subject) {
  static const std::vector<std::string> kColumns{"trial_id",  "technique", "condition",
                                                 "position_idx", "radius_cm", "mt_ms",
                                                 "d_cm",      "t_px"};
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trial CSV is empty");
  std::vector<std::string> header = split_csv(line);
  const bool has_subject = !header.empty() && header.front() == "subject_id";
  if (has_subject) header.erase(header.begin());
  if (header != kColumns) throw std::runtime_error("trial CSV has an unexpected header: " + line);

  TrialTable table;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> f = split_csv(line);
    Row row;
    row.subject_id = default_subject;
    if (has_subject) {
      if (f.empty()) throw std::runtime_error("line " + std::to_string(lineno) + ": empty row");
      row.subject_id = f.front();
      f.erase(f.begin());
    }
    if (f.size() != kColumns.size()) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected " +
                               std::to_string(kColumns.size()) + " columns");
    }
    TrialRecord& r = row.trial;
    try {
      r.trial_id = parse_int(f[0], lineno);
      r.spec.technique = technique_from_string(f[1]);
      r.spec.condition = condition_from_string(f[2]);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
    }
    r.spec.position_idx = parse_int(f[3], lineno);
    r.spec.radius_cm = parse_double(f[4], lineno);
    r.mt_ms = parse_double(f[5], lineno);
    r.d_cm = parse_double(f[6], lineno);
    r.t_px = parse_double(f[7], lineno);
    table.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// reports

std::string report(const TrialTable& table, Factor f, Measure m) {
  std::ostringstream out;
  const auto levels = summarize(table, f, m);
  const char* unit = m == Measure::Mt ? "ms" : m == Measure::D ? "cm" : "px";
  out << "factor: " << to_string(f) << "  measure: " << to_string(m) << " (" << unit << ")\n";
  for (const LevelSummary& s : levels) {
    out << "  " << s.level << ": mean " << s.mean;
    if (m == Measure::Mt) out << " (" << s.mean / 1000.0 << " s)";
    out << "  subjects " << s.subjects << "  trials " << s.trials << '\n';
  }

  const SubjectMatrix mat = subject_level_means(table, f, m);
  for (const std::string& s : mat.excluded) {
    out << "  subject " << s << " excluded from ANOVA (missing levels)\n";
  }
  if (mat.levels.size() < 2) {
    out << "RM-ANOVA: not computed (factor has fewer than 2 levels)\n";
  } else if (mat.values.size() < 2) {
    out << "RM-ANOVA: not computed (needs at least 2 subjects with every level; have "
        << mat.values.size() << ")\n";
  } else {
    const AnovaResult a = rm_anova_oneway(mat.values);
    out << "RM-ANOVA (uncorrected): F(" << a.df1 << "," << a.df2 << ") = " << a.f
        << "  p = " << a.p << '\n';
  }
  return out.str();
}

void write_summary_csv(std::ostream& out, Factor f, Measure m,
                       const std::vector<LevelSummary>& levels) {
  out << "factor,measure,level,mean,subjects,trials\n";
  for (const LevelSummary& s : levels) {
    out << to_string(f) << ',' << to_string(m) << ',' << s.level << ','
        << wire::format_number(s.mean) << ',' << s.subjects << ',' << s.trials << '\n';
  }
}

}  // namespace planecast::analytics
