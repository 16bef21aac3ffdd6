#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace mfwidth::classify {

enum class Mode { Plucked, Struck, Bowed, Unknown };

const char* to_string(Mode mode);
// Accepts the lowercase tokens; throws Error(InvalidInput) otherwise.
Mode mode_from_string(const std::string& token);

struct WidthRecord {
  std::string instrument;
  Mode mode = Mode::Unknown;
  double width = 0.0;
};

struct Clustering {
  // assignments[i] is the cluster of records[i]; clusters are numbered in
  // ascending centroid order.
  std::vector<std::size_t> assignments;
  std::vector<double> centroids;
  std::size_t iterations = 0;
};

// Deterministic 1-D k-means. The partition is the exact least-squares
// optimum over contiguous runs of the sorted widths (dynamic programming),
// which is always a Lloyd fixpoint; Lloyd steps then run from its centroids
// until the assignment stops changing.
Clustering cluster_widths(const std::vector<WidthRecord>& records, std::size_t k);

// Clusters within each playing mode separately. Each mode present gets one
// cluster; the remaining k - modes clusters go one at a time to the mode
// whose within-cluster sum of squares drops the most. Cluster ids are ordered
// by mode (plucked, struck, bowed, unknown), then by centroid.
struct ModeClustering {
  Clustering clustering;
  std::vector<Mode> cluster_modes;
};
ModeClustering cluster_widths_by_mode(const std::vector<WidthRecord>& records,
                                      std::size_t k);

double within_cluster_sse(const std::vector<WidthRecord>& records,
                          const Clustering& clustering);

struct GroupRange {
  int group = 0;
  Mode mode = Mode::Unknown;
  double lo = 0.0;
  double hi = 0.0;
};

using GroupRanges = std::vector<GroupRange>;

// Ranges read off the reference instrument survey: groups 1-3 plucked,
// 4 bowed, 5 struck.
GroupRanges default_group_ranges();
void validate_ranges(const GroupRanges& ranges);

struct ModeCandidate {
  int group = 0;
  Mode mode = Mode::Unknown;
  double distance = 0.0;  // from interval midpoint, or from the interval edge
                          // when out of range
};

struct ModeAssignment {
  std::vector<ModeCandidate> candidates;
  bool out_of_range = false;
};

ModeAssignment assign_mode(double width, const GroupRanges& ranges);

struct ConfusionMatrix {
  static constexpr std::size_t kModes = 3;
  std::array<std::array<double, kModes>, kModes> counts{};
  std::array<std::array<double, kModes>, kModes> percentages{};
  std::array<bool, kModes> row_defined{};

  // Builds a matrix carrying only percentages (counts zero), e.g. a published
  // table kept as a fixture.
  static ConfusionMatrix from_percentages(
      const std::array<std::array<double, kModes>, kModes>& pct);
};

struct Response {
  std::string listener;
  std::string instrument;
  Mode true_mode = Mode::Unknown;
  Mode perceived_mode = Mode::Unknown;
};

ConfusionMatrix confusion_matrix(const std::vector<Response>& responses);

// Tab-separated table: header row then one row per true mode, values printed
// with at most two decimals and trailing zeros dropped.
std::string render_confusion_table(const ConfusionMatrix& matrix);
std::string format_percentage(double value);

struct GroupSummary {
  std::size_t cluster = 0;
  std::optional<Mode> mode;
  std::vector<std::string> instruments;
  std::vector<double> widths;
  double centroid = 0.0;
  double span_lo = 0.0;
  double span_hi = 0.0;
};

struct PlotPoint {
  std::string instrument;
  double width = 0.0;
  std::size_t cluster = 0;
};

struct GroupReport {
  std::vector<GroupSummary> groups;
  std::vector<PlotPoint> plot;
};

GroupReport group_report(const std::vector<WidthRecord>& records,
                         const Clustering& clustering,
                         const std::vector<Mode>& cluster_modes = {});

}  // namespace mfwidth::classify
