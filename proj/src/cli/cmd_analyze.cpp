#include <algorithm>
#include <atomic>
#include <bit>
#include <cctype>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "commands.hpp"
#include "mfwidth/audio.hpp"
#include "mfwidth/cli.hpp"
#include "mfwidth/error.hpp"
#include "mfwidth/mfdfa.hpp"

namespace mfwidth::cli {

namespace {

using ojson = nlohmann::ordered_json;

constexpr double kDefaultSegmentSeconds = 30.0;

struct AnalyzeOptions {
  std::vector<std::string> paths;
  std::string scales;
  std::vector<std::size_t> scale_list;  // explicit list from a config file
  std::string q;
  std::vector<double> q_list;
  int order = 1;
  std::string segmentation = "both-ends";
  double variance_floor = 1e-30;
  std::optional<double> fit_window;
  double start = 0.0;
  std::optional<double> duration;
  bool no_normalize = false;
  std::string input_format = "auto";
  double rate = 0.0;
  unsigned jobs = 1;
  std::string format = "jsonl";
  std::string out;
  std::string config;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) parts.push_back(part);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

template <typename T>
T parse_number(const std::string& text, const std::string& what) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (!in || !in.eof()) throw UsageError("bad " + what + " '" + text + "'");
  return value;
}

std::vector<std::size_t> parse_scale_grid(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) throw UsageError("--scales expects lo:hi:count, got '" + spec + "'");
  const auto lo = parse_number<long long>(parts[0], "scale");
  const auto hi = parse_number<long long>(parts[1], "scale");
  const auto count = parse_number<long long>(parts[2], "scale count");
  if (lo < 1 || hi < lo || count < 1) throw UsageError("--scales needs 1 <= lo <= hi, count >= 1");
  return log_spaced_scales(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi),
                           static_cast<std::size_t>(count));
}

std::vector<double> parse_q_grid(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) throw UsageError("--q expects lo:hi:count, got '" + spec + "'");
  const auto lo = parse_number<double>(parts[0], "q");
  const auto hi = parse_number<double>(parts[1], "q");
  const auto count = parse_number<long long>(parts[2], "q count");
  if (!(hi >= lo) || count < 1) throw UsageError("--q needs lo <= hi, count >= 1");
  return linear_grid(lo, hi, static_cast<std::size_t>(count));
}

bool is_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::memcmp(magic, "RIFF", 4) == 0;
}

double sidecar_rate(const std::string& path) {
  std::ifstream in(path + ".json");
  if (!in) return 1.0;
  try {
    const auto meta = nlohmann::json::parse(in);
    if (meta.contains("sample_rate")) return meta.at("sample_rate").get<double>();
  } catch (const std::exception&) {
  }
  return 1.0;
}

std::vector<double> read_f64(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open '" + path + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 8 != 0) {
    throw Error(ErrorKind::MalformedContainer, "raw sample file size is not a multiple of 8");
  }
  std::vector<double> samples(bytes.size() / 8);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) {
      bits = (bits << 8) | static_cast<unsigned char>(bytes[i * 8 + static_cast<std::size_t>(b)]);
    }
    samples[i] = std::bit_cast<double>(bits);
  }
  return samples;
}

struct LoadedSignal {
  std::optional<Signal> signal;
  std::string input_format;
  double start = 0.0;
  double duration = 0.0;
  bool normalized = false;
};

LoadedSignal load_signal(const std::string& path, const AnalyzeOptions& opt,
                         std::vector<std::string>& warnings) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::InvalidInput, "cannot open '" + path + "'");
  }
  LoadedSignal loaded;
  std::string format = opt.input_format;
  if (format == "auto") format = is_wav(path) ? "wav" : "f64";
  loaded.input_format = format;

  if (format == "wav") {
    audio::AudioClip clip = audio::mixdown_mono(audio::load_wav(path));
    if (!opt.no_normalize) {
      clip = audio::normalize_peak(clip);
      loaded.normalized = true;
    }
    const double available = static_cast<double>(clip.frames()) / clip.sample_rate;
    double duration = opt.duration.value_or(kDefaultSegmentSeconds);
    if (!opt.duration && opt.start + duration > available) {
      duration = available - opt.start;
      std::ostringstream msg;
      msg << "clip holds " << available << " s; analyzed " << duration
          << " s instead of the default 30 s window";
      warnings.push_back(msg.str());
    }
    loaded.signal.emplace(audio::extract_segment(clip, opt.start, duration));
    loaded.start = opt.start;
    loaded.duration = static_cast<double>(loaded.signal->size()) / clip.sample_rate;
    return loaded;
  }

  const double rate = opt.rate > 0.0 ? opt.rate : sidecar_rate(path);
  std::vector<double> samples = read_f64(path);
  if (opt.start > 0.0 || opt.duration) {
    audio::AudioClip clip;
    clip.sample_rate = rate;
    clip.channels.push_back(std::move(samples));
    const double duration = opt.duration.value_or(
        static_cast<double>(clip.frames()) / rate - opt.start);
    loaded.signal.emplace(audio::extract_segment(clip, opt.start, duration));
  } else {
    loaded.signal.emplace(std::move(samples), rate);
  }
  loaded.start = opt.start;
  loaded.duration = static_cast<double>(loaded.signal->size()) / rate;
  return loaded;
}

MfdfaConfig build_config(const AnalyzeOptions& opt, std::size_t n) {
  MfdfaConfig config;
  if (!opt.scale_list.empty()) {
    config.scales = opt.scale_list;
  } else if (!opt.scales.empty()) {
    config.scales = parse_scale_grid(opt.scales);
  } else {
    config.scales = default_scales(n);
  }
  if (!opt.q_list.empty()) {
    config.q_grid = opt.q_list;
  } else if (!opt.q.empty()) {
    config.q_grid = parse_q_grid(opt.q);
  } else {
    config.q_grid = default_q_grid();
  }
  config.detrend_order = opt.order;
  config.segmentation = segmentation_from_string(opt.segmentation);
  config.variance_floor = opt.variance_floor;
  config.fit_min_f = opt.fit_window;
  return config;
}

ojson analyze_one(const std::string& path, const AnalyzeOptions& opt) {
  ojson record;
  record["source"] = path;
  record["status"] = "ok";
  std::vector<std::string> warnings;
  try {
    const LoadedSignal loaded = load_signal(path, opt, warnings);
    const Signal& signal = *loaded.signal;
    const MfdfaConfig config = build_config(opt, signal.size());
    record["sample_rate"] = signal.sample_rate();
    record["n_samples"] = signal.size();
    record["config"] = {
        {"input_format", loaded.input_format},
        {"start", loaded.start},
        {"duration", loaded.duration},
        {"normalize", loaded.normalized},
        {"scales", config.scales},
        {"q", config.q_grid},
        {"detrend_order", config.detrend_order},
        {"segmentation", to_string(config.segmentation)},
        {"variance_floor", config.variance_floor},
        {"fit_window", config.fit_min_f ? ojson(*config.fit_min_f) : ojson(nullptr)},
    };

    const ScalingAnalysis scaling = mfdfa_scaling(signal, config);
    warnings.insert(warnings.end(), scaling.warnings.begin(), scaling.warnings.end());
    record["hurst"] = {{"q", scaling.hurst.q_grid},
                       {"h", scaling.hurst.h},
                       {"intercept", scaling.hurst.intercepts},
                       {"r_squared", scaling.hurst.r_squared}};
    record["tau"] = scaling.tau.tau;
    record["points"] = {{"alpha", scaling.points.alpha}, {"f_alpha", scaling.points.f_alpha}};
    try {
      const SingularitySpectrum s = fit_quadratic_width(scaling.points, config.fit_min_f);
      record["spectrum"] = {{"alpha0", s.alpha0}, {"A", s.coeff_a},     {"B", s.coeff_b},
                            {"C", s.coeff_c},     {"alpha1", s.alpha1}, {"alpha2", s.alpha2},
                            {"degenerate", s.degenerate}};
      record["width"] = s.width;
    } catch (const Error& e) {
      record["spectrum"] = nullptr;
      record["width"] = nullptr;
      record["status"] = "error";
      record["error"] = e.what();
    }
  } catch (const std::exception& e) {
    record["status"] = "error";
    record["error"] = e.what();
  }
  record["warnings"] = warnings;
  return record;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(const ojson& v) {
  return v.is_number() ? format_double(v.get<double>()) : std::string();
}

void write_csv(std::ostream& out, const std::vector<ojson>& records) {
  out << "source,status,n_samples,sample_rate,h2,width,alpha0,A,B,C,alpha1,alpha2,warnings,error\n";
  for (const auto& r : records) {
    std::string h2;
    if (r.contains("hurst")) {
      const auto& q = r["hurst"]["q"];
      for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i].get<double>() == 2.0) h2 = csv_number(r["hurst"]["h"][i]);
      }
    }
    const ojson none;
    const ojson& s = r.contains("spectrum") ? r["spectrum"] : none;
    auto spec = [&](const char* key) { return s.is_object() ? csv_number(s[key]) : std::string(); };
    std::string warnings;
    for (const auto& w : r["warnings"]) {
      if (!warnings.empty()) warnings += "; ";
      warnings += w.get<std::string>();
    }
    out << csv_field(r["source"].get<std::string>()) << ',' << r["status"].get<std::string>()
        << ',' << (r.contains("n_samples") ? std::to_string(r["n_samples"].get<std::size_t>()) : "")
        << ',' << (r.contains("sample_rate") ? csv_number(r["sample_rate"]) : "") << ',' << h2
        << ',' << (r.contains("width") ? csv_number(r["width"]) : "") << ',' << spec("alpha0")
        << ',' << spec("A") << ',' << spec("B") << ',' << spec("C") << ',' << spec("alpha1")
        << ',' << spec("alpha2") << ',' << csv_field(warnings) << ','
        << csv_field(r.contains("error") ? r["error"].get<std::string>() : "") << '\n';
  }
}

unsigned default_jobs() {
  if (const char* env = std::getenv("MFWIDTH_JOBS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

// Config-file keys mirror the long flag names; explicit flags win.
void apply_config_file(AnalyzeOptions& opt, CLI::App& sub) {
  std::ifstream in(opt.config);
  if (!in) throw UsageError("cannot read config '" + opt.config + "'");
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(in);
    // An analysis record's config echo is accepted as-is.
    if (cfg.contains("config") && cfg["config"].is_object()) cfg = cfg["config"];
  } catch (const std::exception& e) {
    throw UsageError("config '" + opt.config + "' is not valid JSON: " + e.what());
  }
  auto unset = [&](const char* flag) { return sub.count(flag) == 0; };
  try {
    if (cfg.contains("scales") && unset("--scales")) {
      if (cfg["scales"].is_array()) {
        opt.scale_list = cfg["scales"].get<std::vector<std::size_t>>();
      } else {
        opt.scales = cfg["scales"].get<std::string>();
      }
    }
    if (cfg.contains("q") && unset("--q")) {
      if (cfg["q"].is_array()) {
        opt.q_list = cfg["q"].get<std::vector<double>>();
      } else {
        opt.q = cfg["q"].get<std::string>();
      }
    }
    if (cfg.contains("order") && unset("--order")) opt.order = cfg["order"].get<int>();
    if (cfg.contains("detrend_order") && unset("--order")) {
      opt.order = cfg["detrend_order"].get<int>();
    }
    if (cfg.contains("segmentation") && unset("--segmentation")) {
      opt.segmentation = cfg["segmentation"].get<std::string>();
    }
    if (cfg.contains("variance_floor") && unset("--variance-floor")) {
      opt.variance_floor = cfg["variance_floor"].get<double>();
    }
    if (cfg.contains("fit_window") && unset("--fit-window") && !cfg["fit_window"].is_null()) {
      opt.fit_window = cfg["fit_window"].get<double>();
    }
    if (cfg.contains("start") && unset("--start")) opt.start = cfg["start"].get<double>();
    if (cfg.contains("duration") && unset("--duration")) {
      opt.duration = cfg["duration"].get<double>();
    }
    if (cfg.contains("normalize") && unset("--no-normalize")) {
      opt.no_normalize = !cfg["normalize"].get<bool>();
    }
    if (cfg.contains("input_format") && unset("--input-format")) {
      opt.input_format = cfg["input_format"].get<std::string>();
    }
    if (cfg.contains("rate") && unset("--rate")) opt.rate = cfg["rate"].get<double>();
    if (cfg.contains("jobs") && unset("--jobs")) opt.jobs = cfg["jobs"].get<unsigned>();
    if (cfg.contains("format") && unset("--format")) opt.format = cfg["format"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config '" + opt.config + "': " + e.what());
  }
}

}  // namespace

Action add_analyze(CLI::App& app) {
  auto opt = std::make_shared<AnalyzeOptions>();
  opt->jobs = default_jobs();
  CLI::App* sub = app.add_subcommand("analyze", "Compute MFDFA spectra and widths for audio or raw sample files");
  sub->add_option("paths", opt->paths, "WAV files or raw float64 sample files")->required();
  sub->add_option("--scales", opt->scales, "Scale grid lo:hi:count (log-spaced samples)");
  sub->add_option("--q", opt->q, "Moment grid lo:hi:count (linear)");
  sub->add_option("--order", opt->order, "Detrending polynomial order")->check(CLI::Range(0, 3));
  sub->add_option("--segmentation", opt->segmentation, "Segment layout")
      ->check(CLI::IsMember({"both-ends", "forward-only", "both", "forward"}));
  sub->add_option("--variance-floor", opt->variance_floor, "Smallest admissible segment variance")
      ->check(CLI::PositiveNumber);
  sub->add_option("--fit-window", opt->fit_window,
                  "Fit the quadratic only to points with f(alpha) >= this value");
  sub->add_option("--start", opt->start, "Segment start in seconds")->check(CLI::NonNegativeNumber);
  sub->add_option("--duration", opt->duration, "Segment length in seconds (default 30 for WAV)");
  sub->add_flag("--no-normalize", opt->no_normalize, "Skip peak normalization of WAV input");
  sub->add_option("--input-format", opt->input_format, "auto, wav or f64")
      ->check(CLI::IsMember({"auto", "wav", "f64"}));
  sub->add_option("--rate", opt->rate, "Sample rate for raw f64 input")->check(CLI::NonNegativeNumber);
  sub->add_option("--jobs", opt->jobs, "Files analyzed in parallel (env MFWIDTH_JOBS)")
      ->check(CLI::Range(1u, 1024u));
  sub->add_option("--format", opt->format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
  sub->add_option("--out", opt->out, "Write output here instead of stdout");
  sub->add_option("--config", opt->config, "JSON file with the same keys as the flags");

  return [opt, sub](Streams io) -> int {
    AnalyzeOptions& o = *opt;
    if (!o.config.empty()) apply_config_file(o, *sub);
    if (!o.scales.empty()) parse_scale_grid(o.scales);
    if (!o.q.empty()) parse_q_grid(o.q);
    if (o.order < 0 || o.order > kMaxDetrendOrder) throw UsageError("--order must be in [0, 3]");
    segmentation_from_string(o.segmentation);

    std::vector<ojson> records(o.paths.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < o.paths.size(); i = next++) {
        records[i] = analyze_one(o.paths[i], o);
      }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(o.jobs, static_cast<unsigned>(o.paths.size())));
    if (jobs == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    Sink sink(o.out, io.out);
    if (o.format == "csv") {
      write_csv(sink.stream(), records);
    } else {
      for (const auto& r : records) sink.stream() << r.dump() << '\n';
    }
    sink.close();

    bool failed = false;
    for (const auto& r : records) {
      if (r["status"] != "ok") {
        failed = true;
        io.err << r["source"].get<std::string>() << ": " << r["error"].get<std::string>() << '\n';
      }
    }
    return failed ? kExitPartial : kExitOk;
  };
}

}  // namespace mfwidth::cli
