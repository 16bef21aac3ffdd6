#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>

#include "commands.hpp"
#include "mfwidth/classify.hpp"
#include "mfwidth/cli.hpp"
#include "mfwidth/csv.hpp"
#include "mfwidth/error.hpp"

namespace mfwidth::cli {

namespace {

using ojson = nlohmann::ordered_json;
using namespace mfwidth::classify;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<CsvRow> read_table(const std::string& path, const std::vector<std::string>& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<CsvRow> rows;
  try {
    rows = read_csv(in);
  } catch (const Error& e) {
    throw DataError(path + ": " + e.what());
  }
  if (rows.empty()) return rows;
  std::vector<std::string> got;
  for (const auto& f : rows.front().fields) got.push_back(lower(f));
  if (got != header) {
    std::string want;
    for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
    throw DataError(path + ": line " + std::to_string(rows.front().line) + ": expected header " +
                    want);
  }
  rows.erase(rows.begin());
  for (const auto& row : rows) {
    if (row.fields.size() != header.size()) {
      throw DataError(path + ": line " + std::to_string(row.line) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(row.fields.size()));
    }
  }
  return rows;
}

Mode parse_mode(const std::string& token, const std::string& where) {
  try {
    return mode_from_string(lower(token));
  } catch (const Error& e) {
    throw DataError(where + ": " + e.what());
  }
}

std::vector<WidthRecord> read_widths(const std::string& path) {
  std::vector<WidthRecord> records;
  for (const auto& row : read_table(path, {"instrument", "mode", "width"})) {
    const std::string where = path + ": line " + std::to_string(row.line);
    WidthRecord r;
    r.instrument = row.fields[0];
    if (r.instrument.empty()) throw DataError(where + ": empty instrument name");
    r.mode = parse_mode(row.fields[1], where);
    const std::string& w = row.fields[2];
    const auto res = std::from_chars(w.data(), w.data() + w.size(), r.width);
    if (res.ec != std::errc() || res.ptr != w.data() + w.size() || !std::isfinite(r.width)) {
      throw DataError(where + ": bad width '" + w + "'");
    }
    records.push_back(std::move(r));
  }
  return records;
}

GroupRanges read_ranges(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read ranges '" + path + "'");
  GroupRanges ranges;
  try {
    const auto doc = nlohmann::json::parse(in);
    for (const auto& g : doc.at("groups")) {
      GroupRange r;
      r.group = g.at("group").get<int>();
      r.mode = mode_from_string(lower(g.at("mode").get<std::string>()));
      r.lo = g.at("lo").get<double>();
      r.hi = g.at("hi").get<double>();
      ranges.push_back(r);
    }
    validate_ranges(ranges);
  } catch (const std::exception& e) {
    throw UsageError("ranges '" + path + "': " + e.what());
  }
  return ranges;
}

std::string candidate_list(const ModeAssignment& a) {
  std::string out;
  for (const auto& c : a.candidates) {
    if (!out.empty()) out += ';';
    out += std::to_string(c.group) + ':' + to_string(c.mode) + ':' + format_double(c.distance);
  }
  return out;
}

struct ClusterOptions {
  std::string input;
  std::size_t k = 5;
  bool by_mode = false;
  std::string ranges;
  std::string format = "json";
  std::string plot_out;
  std::string out;
};

struct ConfusionOptions {
  std::string input;
  std::string format = "text";
  std::string out;
};

}  // namespace

Action add_cluster(CLI::App& app) {
  auto opt = std::make_shared<ClusterOptions>();
  CLI::App* sub = app.add_subcommand("cluster", "Group spectral widths and map them to playing modes");
  sub->add_option("input", opt->input, "CSV with header instrument,mode,width")->required();
  sub->add_option("--k", opt->k, "Number of groups")->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
  sub->add_flag("--by-mode", opt->by_mode,
                "Cluster within each playing mode; k is split across modes");
  sub->add_option("--ranges", opt->ranges, "JSON file of group width ranges");
  sub->add_option("--format", opt->format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--plot-out", opt->plot_out, "Write plot data CSV (instrument, width, group)");
  sub->add_option("--out", opt->out, "Write the report here instead of stdout");

  return [opt](Streams io) -> int {
    const ClusterOptions& o = *opt;
    const GroupRanges ranges = o.ranges.empty() ? default_group_ranges() : read_ranges(o.ranges);
    const std::vector<WidthRecord> records = read_widths(o.input);
    if (records.empty()) throw DataError(o.input + ": no width records");

    Clustering clustering;
    std::vector<Mode> cluster_modes;
    try {
      if (o.by_mode) {
        ModeClustering mc = cluster_widths_by_mode(records, o.k);
        clustering = std::move(mc.clustering);
        cluster_modes = std::move(mc.cluster_modes);
      } else {
        clustering = cluster_widths(records, o.k);
      }
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    const GroupReport report = group_report(records, clustering, cluster_modes);

    Sink sink(o.out, io.out);
    std::ostream& out = sink.stream();
    if (o.format == "csv") {
      out << "instrument,mode,width,group,best_group,best_mode,out_of_range,candidates\n";
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto a = assign_mode(records[i].width, ranges);
        out << records[i].instrument << ',' << to_string(records[i].mode) << ','
            << format_double(records[i].width) << ',' << clustering.assignments[i] + 1 << ','
            << a.candidates.front().group << ',' << to_string(a.candidates.front().mode) << ','
            << (a.out_of_range ? "true" : "false") << ',' << candidate_list(a) << '\n';
      }
    } else {
      ojson doc;
      doc["k"] = o.k;
      doc["by_mode"] = o.by_mode;
      doc["within_cluster_sse"] = within_cluster_sse(records, clustering);
      doc["groups"] = ojson::array();
      for (const auto& g : report.groups) {
        doc["groups"].push_back({{"group", g.cluster + 1},
                                 {"mode", g.mode ? ojson(to_string(*g.mode)) : ojson(nullptr)},
                                 {"centroid", g.centroid},
                                 {"span", {g.span_lo, g.span_hi}},
                                 {"instruments", g.instruments},
                                 {"widths", g.widths}});
      }
      doc["records"] = ojson::array();
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto a = assign_mode(records[i].width, ranges);
        ojson candidates = ojson::array();
        for (const auto& c : a.candidates) {
          candidates.push_back(
              {{"group", c.group}, {"mode", to_string(c.mode)}, {"distance", c.distance}});
        }
        doc["records"].push_back({{"instrument", records[i].instrument},
                                  {"mode", to_string(records[i].mode)},
                                  {"width", records[i].width},
                                  {"group", clustering.assignments[i] + 1},
                                  {"out_of_range", a.out_of_range},
                                  {"candidates", candidates}});
      }
      out << doc.dump(2) << '\n';
    }
    sink.close();

    if (!o.plot_out.empty()) {
      Sink plot(o.plot_out, io.out);
      plot.stream() << "index,instrument,width,group\n";
      for (std::size_t i = 0; i < report.plot.size(); ++i) {
        const auto& p = report.plot[i];
        plot.stream() << i + 1 << ',' << p.instrument << ',' << format_double(p.width) << ','
                      << p.cluster + 1 << '\n';
      }
      plot.close();
    }
    return kExitOk;
  };
}

Action add_confusion(CLI::App& app) {
  auto opt = std::make_shared<ConfusionOptions>();
  CLI::App* sub = app.add_subcommand("confusion", "Tally listener responses into a confusion matrix");
  sub->add_option("input", opt->input,
                  "CSV with header listener_id,instrument,true_mode,perceived_mode")
      ->required();
  sub->add_option("--format", opt->format, "text or json")->check(CLI::IsMember({"text", "json"}));
  sub->add_option("--out", opt->out, "Write here instead of stdout");

  return [opt](Streams io) -> int {
    const ConfusionOptions& o = *opt;
    std::vector<Response> responses;
    for (const auto& row :
         read_table(o.input, {"listener_id", "instrument", "true_mode", "perceived_mode"})) {
      const std::string where = o.input + ": line " + std::to_string(row.line);
      Response r{row.fields[0], row.fields[1], parse_mode(row.fields[2], where),
                 parse_mode(row.fields[3], where)};
      if (r.true_mode == Mode::Unknown || r.perceived_mode == Mode::Unknown) {
        throw DataError(where + ": mode must be plucked, struck or bowed");
      }
      responses.push_back(std::move(r));
    }
    if (responses.empty()) throw DataError("no responses");
    const ConfusionMatrix m = confusion_matrix(responses);

    Sink sink(o.out, io.out);
    if (o.format == "json") {
      static constexpr const char* kNames[] = {"plucked", "struck", "bowed"};
      ojson doc;
      doc["modes"] = {kNames[0], kNames[1], kNames[2]};
      doc["counts"] = ojson::array();
      doc["percentages"] = ojson::array();
      for (std::size_t i = 0; i < ConfusionMatrix::kModes; ++i) {
        ojson counts = ojson::array();
        ojson pct = ojson::array();
        for (std::size_t j = 0; j < ConfusionMatrix::kModes; ++j) {
          counts.push_back(static_cast<long long>(m.counts[i][j]));
          pct.push_back(m.row_defined[i] ? ojson(m.percentages[i][j]) : ojson(nullptr));
        }
        doc["counts"].push_back(counts);
        doc["percentages"].push_back(pct);
      }
      doc["responses"] = responses.size();
      sink.stream() << doc.dump(2) << '\n';
    } else {
      sink.stream() << render_confusion_table(m);
    }
    sink.close();
    return kExitOk;
  };
}

}  // namespace mfwidth::cli
