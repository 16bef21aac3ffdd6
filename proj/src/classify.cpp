#include "mfwidth/classify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "mfwidth/error.hpp"

namespace mfwidth::classify {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorKind::InvalidInput, what);
}

constexpr std::size_t kMaxLloydIterations = 1000;
constexpr std::array<Mode, 4> kModeOrder = {Mode::Plucked, Mode::Struck, Mode::Bowed,
                                            Mode::Unknown};

std::size_t mode_index(Mode mode) {
  switch (mode) {
    case Mode::Plucked: return 0;
    case Mode::Struck: return 1;
    case Mode::Bowed: return 2;
    default: invalid("mode must be plucked, struck or bowed");
  }
}

// Distinct sorted widths with multiplicities.
struct ValueSet {
  std::vector<double> values;
  std::vector<std::size_t> counts;
};

ValueSet distinct_values(const std::vector<WidthRecord>& records) {
  std::vector<double> w;
  w.reserve(records.size());
  for (const auto& r : records) {
    if (!std::isfinite(r.width)) invalid("width of '" + r.instrument + "' is not finite");
    w.push_back(r.width);
  }
  std::sort(w.begin(), w.end());
  ValueSet set;
  for (double v : w) {
    if (set.values.empty() || v != set.values.back()) {
      set.values.push_back(v);
      set.counts.push_back(1);
    } else {
      ++set.counts.back();
    }
  }
  return set;
}

std::size_t nearest(const std::vector<double>& centroids, double v) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < centroids.size(); ++j) {
    if (std::abs(v - centroids[j]) < std::abs(v - centroids[best])) best = j;
  }
  return best;
}

}  // namespace

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Plucked: return "plucked";
    case Mode::Struck: return "struck";
    case Mode::Bowed: return "bowed";
    default: return "unknown";
  }
}

Mode mode_from_string(const std::string& token) {
  if (token == "plucked") return Mode::Plucked;
  if (token == "struck") return Mode::Struck;
  if (token == "bowed") return Mode::Bowed;
  if (token == "unknown") return Mode::Unknown;
  invalid("unknown mode token '" + token + "'");
}

Clustering cluster_widths(const std::vector<WidthRecord>& records, std::size_t k) {
  if (k < 1) invalid("k must be at least 1");
  if (k > records.size()) invalid("k exceeds the number of records");
  const ValueSet set = distinct_values(records);
  const std::size_t d = set.values.size();
  if (d < k) invalid("fewer distinct values than k");

  // Exact optimum over contiguous splits of the sorted distinct values
  // (weighted by multiplicity), then Lloyd steps from its centroids to
  // confirm the assignment fixpoint.
  std::vector<long double> w(d + 1, 0.0L), wx(d + 1, 0.0L), wxx(d + 1, 0.0L);
  for (std::size_t i = 0; i < d; ++i) {
    const long double c = static_cast<long double>(set.counts[i]);
    const long double x = set.values[i];
    w[i + 1] = w[i] + c;
    wx[i + 1] = wx[i] + c * x;
    wxx[i + 1] = wxx[i] + c * x * x;
  }
  auto cost = [&](std::size_t b, std::size_t e) {
    const long double n = w[e] - w[b];
    const long double sx = wx[e] - wx[b];
    return std::max(0.0L, wxx[e] - wxx[b] - sx * sx / n);
  };
  const long double inf = std::numeric_limits<long double>::infinity();
  std::vector<std::vector<long double>> best(k + 1, std::vector<long double>(d + 1, inf));
  std::vector<std::vector<std::size_t>> cut(k + 1, std::vector<std::size_t>(d + 1, 0));
  best[0][0] = 0.0L;
  for (std::size_t m = 1; m <= k; ++m) {
    for (std::size_t e = m; e <= d - (k - m); ++e) {
      for (std::size_t b = m - 1; b < e; ++b) {
        if (best[m - 1][b] == inf) continue;
        const long double v = best[m - 1][b] + cost(b, e);
        if (v < best[m][e]) {
          best[m][e] = v;
          cut[m][e] = b;
        }
      }
    }
  }
  std::vector<std::size_t> label(d, 0);
  std::vector<double> centroids(k);
  for (std::size_t m = k, e = d; m > 0; --m) {
    const std::size_t b = cut[m][e];
    for (std::size_t i = b; i < e; ++i) label[i] = m - 1;
    centroids[m - 1] = static_cast<double>((wx[e] - wx[b]) / (w[e] - w[b]));
    e = b;
  }

  Clustering out;
  for (out.iterations = 0; out.iterations < kMaxLloydIterations; ++out.iterations) {
    bool changed = false;
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t j = nearest(centroids, set.values[i]);
      if (j != label[i]) {
        label[i] = j;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> members(k, 0);
    for (std::size_t i = 0; i < d; ++i) {
      sum[label[i]] += set.values[i] * static_cast<double>(set.counts[i]);
      members[label[i]] += set.counts[i];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (members[j] > 0) centroids[j] = sum[j] / static_cast<double>(members[j]);
    }
  }

  // Relabel clusters in ascending centroid order.
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return centroids[a] < centroids[b]; });
  std::vector<std::size_t> rank(k);
  for (std::size_t r = 0; r < k; ++r) rank[order[r]] = r;

  std::map<double, std::size_t> cluster_of;
  std::vector<double> sum(k, 0.0);
  std::vector<std::size_t> members(k, 0);
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t c = rank[label[i]];
    cluster_of[set.values[i]] = c;
    sum[c] += set.values[i] * static_cast<double>(set.counts[i]);
    members[c] += set.counts[i];
  }
  out.centroids.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    out.centroids[c] = members[c] > 0 ? sum[c] / static_cast<double>(members[c])
                                      : centroids[order[c]];
  }
  out.assignments.reserve(records.size());
  for (const auto& r : records) out.assignments.push_back(cluster_of.at(r.width));
  return out;
}

double within_cluster_sse(const std::vector<WidthRecord>& records,
                          const Clustering& clustering) {
  double sse = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double d = records[i].width - clustering.centroids.at(clustering.assignments.at(i));
    sse += d * d;
  }
  return sse;
}

ModeClustering cluster_widths_by_mode(const std::vector<WidthRecord>& records,
                                      std::size_t k) {
  if (k < 1) invalid("k must be at least 1");
  if (k > records.size()) invalid("k exceeds the number of records");

  struct Stratum {
    Mode mode;
    std::vector<std::size_t> rows;
    std::vector<WidthRecord> records;
    std::size_t distinct = 0;
    std::size_t k = 1;
    Clustering clustering;
    double sse = 0.0;
  };
  std::vector<Stratum> strata;
  for (Mode mode : kModeOrder) {
    Stratum s{mode, {}, {}, 0, 1, {}, 0.0};
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].mode == mode) {
        s.rows.push_back(i);
        s.records.push_back(records[i]);
      }
    }
    if (s.rows.empty()) continue;
    s.distinct = distinct_values(s.records).values.size();
    s.clustering = cluster_widths(s.records, 1);
    s.sse = within_cluster_sse(s.records, s.clustering);
    strata.push_back(std::move(s));
  }
  if (k < strata.size()) {
    invalid("k is smaller than the number of playing modes present");
  }

  for (std::size_t extra = k - strata.size(); extra > 0; --extra) {
    Stratum* best = nullptr;
    Clustering best_clustering;
    double best_sse = 0.0;
    double best_gain = -1.0;
    for (auto& s : strata) {
      if (s.k + 1 > s.distinct) continue;
      Clustering trial = cluster_widths(s.records, s.k + 1);
      const double sse = within_cluster_sse(s.records, trial);
      const double gain = s.sse - sse;
      if (gain > best_gain) {
        best = &s;
        best_clustering = std::move(trial);
        best_sse = sse;
        best_gain = gain;
      }
    }
    if (best == nullptr) invalid("fewer distinct values than k");
    ++best->k;
    best->clustering = std::move(best_clustering);
    best->sse = best_sse;
  }

  ModeClustering out;
  out.clustering.assignments.assign(records.size(), 0);
  std::size_t offset = 0;
  for (const auto& s : strata) {
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
      out.clustering.assignments[s.rows[i]] = offset + s.clustering.assignments[i];
    }
    for (double c : s.clustering.centroids) {
      out.clustering.centroids.push_back(c);
      out.cluster_modes.push_back(s.mode);
    }
    out.clustering.iterations += s.clustering.iterations;
    offset += s.clustering.centroids.size();
  }
  return out;
}

GroupRanges default_group_ranges() {
  return {
      {1, Mode::Plucked, 0.55, 0.75},
      {2, Mode::Plucked, 0.35, 0.50},
      {3, Mode::Plucked, 0.80, 0.85},
      {4, Mode::Bowed, 0.80, 0.90},
      {5, Mode::Struck, 0.50, 0.55},
  };
}

void validate_ranges(const GroupRanges& ranges) {
  if (ranges.empty()) invalid("group ranges are empty");
  for (const auto& r : ranges) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || !(r.lo < r.hi)) {
      invalid("group " + std::to_string(r.group) + " range must satisfy lo < hi");
    }
  }
}

ModeAssignment assign_mode(double width, const GroupRanges& ranges) {
  validate_ranges(ranges);
  ModeAssignment out;
  for (const auto& r : ranges) {
    if (width >= r.lo && width <= r.hi) {
      out.candidates.push_back({r.group, r.mode, std::abs(width - 0.5 * (r.lo + r.hi))});
    }
  }
  if (out.candidates.empty()) {
    out.out_of_range = true;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : ranges) {
      const double d = width < r.lo ? r.lo - width : width - r.hi;
      best = std::min(best, d);
    }
    for (const auto& r : ranges) {
      const double d = width < r.lo ? r.lo - width : width - r.hi;
      if (d == best) out.candidates.push_back({r.group, r.mode, d});
    }
  }
  std::stable_sort(out.candidates.begin(), out.candidates.end(),
                   [](const ModeCandidate& a, const ModeCandidate& b) {
                     if (a.distance != b.distance) return a.distance < b.distance;
                     return a.group < b.group;
                   });
  return out;
}

ConfusionMatrix ConfusionMatrix::from_percentages(
    const std::array<std::array<double, kModes>, kModes>& pct) {
  ConfusionMatrix m;
  m.percentages = pct;
  m.row_defined.fill(true);
  return m;
}

ConfusionMatrix confusion_matrix(const std::vector<Response>& responses) {
  if (responses.empty()) invalid("no responses");
  ConfusionMatrix m;
  for (const auto& r : responses) {
    m.counts[mode_index(r.true_mode)][mode_index(r.perceived_mode)] += 1.0;
  }
  for (std::size_t t = 0; t < ConfusionMatrix::kModes; ++t) {
    double total = 0.0;
    for (double c : m.counts[t]) total += c;
    m.row_defined[t] = total > 0.0;
    for (std::size_t p = 0; p < ConfusionMatrix::kModes; ++p) {
      m.percentages[t][p] = m.row_defined[t] ? 100.0 * m.counts[t][p] / total
                                             : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return m;
}

std::string format_percentage(double value) {
  if (!std::isfinite(value)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string render_confusion_table(const ConfusionMatrix& matrix) {
  static constexpr std::array<const char*, 3> kLabels = {"Plucked", "Struck", "Bowed"};
  std::ostringstream out;
  for (const char* label : kLabels) out << '\t' << label << " (%)";
  out << '\n';
  for (std::size_t t = 0; t < ConfusionMatrix::kModes; ++t) {
    out << kLabels[t];
    for (std::size_t p = 0; p < ConfusionMatrix::kModes; ++p) {
      out << '\t'
          << (matrix.row_defined[t] ? format_percentage(matrix.percentages[t][p])
                                    : std::string("n/a"));
    }
    out << '\n';
  }
  return out.str();
}

GroupReport group_report(const std::vector<WidthRecord>& records,
                         const Clustering& clustering,
                         const std::vector<Mode>& cluster_modes) {
  if (clustering.assignments.size() != records.size()) {
    invalid("clustering does not match the record list");
  }
  GroupReport report;
  if (records.empty()) return report;

  const std::size_t k = clustering.centroids.size();
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::size_t c = clustering.assignments[i];
    if (c >= k) invalid("cluster id out of range");
    members[c].push_back(i);
    report.plot.push_back({records[i].instrument, records[i].width, c});
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (members[c].empty()) continue;
    auto& rows = members[c];
    std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      if (records[a].width != records[b].width) return records[a].width < records[b].width;
      return records[a].instrument < records[b].instrument;
    });
    GroupSummary g;
    g.cluster = c;
    if (c < cluster_modes.size()) g.mode = cluster_modes[c];
    g.centroid = clustering.centroids[c];
    g.span_lo = records[rows.front()].width;
    g.span_hi = records[rows.back()].width;
    for (std::size_t i : rows) {
      g.instruments.push_back(records[i].instrument);
      g.widths.push_back(records[i].width);
    }
    report.groups.push_back(std::move(g));
  }
  return report;
}

}  // namespace mfwidth::classify
