#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

#include "commands.hpp"
#include "mfwidth/cli.hpp"
#include "mfwidth/error.hpp"
#include "mfwidth/mfdfa.hpp"
#include "mfwidth/synth.hpp"

namespace mfwidth::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct SynthOptions {
  std::string kind;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double hurst = 0.5;
  double a = 0.75;
  int levels = 16;
  std::string assignment = "left";
  double rate = 1.0;
  std::string out;
};

void write_f64(const Signal& signal, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot write '" + path + "'");
  std::vector<char> bytes(signal.size() * 8);
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(signal.samples()[i]);
    for (int b = 0; b < 8; ++b) {
      bytes[i * 8 + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
  }
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  file.close();
  if (!file) throw std::runtime_error("failed writing '" + path + "'");
}

ojson cascade_oracle(double a) {
  const std::vector<double> q = default_q_grid();
  std::vector<double> h, tau, alpha, f;
  for (double v : q) {
    h.push_back(synth::cascade_hurst(a, v));
    tau.push_back(synth::cascade_tau(a, v));
    alpha.push_back(synth::cascade_alpha(a, v));
    f.push_back(synth::cascade_f_alpha(a, v));
  }
  const auto [lo, hi] = std::minmax_element(alpha.begin(), alpha.end());
  return {{"delta_alpha", synth::cascade_asymptotic_width(a)},
          {"alpha_range_on_grid", *hi - *lo},
          {"q", q},
          {"h", h},
          {"tau", tau},
          {"alpha", alpha},
          {"f_alpha", f}};
}

ojson monofractal_oracle(double hurst) {
  const std::vector<double> q = default_q_grid();
  return {{"hurst", hurst},
          {"delta_alpha", 0.0},
          {"q", q},
          {"h", std::vector<double>(q.size(), hurst)}};
}

}  // namespace

Action add_synth(CLI::App& app) {
  auto opt = std::make_shared<SynthOptions>();
  CLI::App* sub = app.add_subcommand("synth", "Write a synthetic test signal as raw float64 samples");
  sub->add_option("kind", opt->kind, "noise, fgn or cascade")
      ->required()
      ->check(CLI::IsMember({"noise", "fgn", "cascade"}));
  sub->add_option("--n", opt->n, "Sample count (noise, fgn)");
  sub->add_option("--seed", opt->seed, "Random seed");
  sub->add_option("--hurst", opt->hurst, "Hurst exponent for fgn, in (0, 1)");
  sub->add_option("--a", opt->a, "Cascade multiplier, in (0.5, 1)");
  sub->add_option("--levels", opt->levels, "Cascade depth; length is 2^levels");
  sub->add_option("--assignment", opt->assignment, "Cascade weight placement")
      ->check(CLI::IsMember({"left", "random"}));
  sub->add_option("--rate", opt->rate, "Sample rate recorded in the metadata")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", opt->out, "Sample file; metadata goes to <out>.json")->required();

  return [opt, sub](Streams io) -> int {
    const SynthOptions& o = *opt;
    ojson meta;
    meta["kind"] = o.kind;
    std::optional<Signal> signal;
    try {
      if (o.kind == "noise") {
        if (sub->count("--n") == 0) throw UsageError("noise needs --n");
        if (o.n < 2) throw UsageError("--n must be at least 2");
        signal.emplace(synth::white_noise(o.n, o.seed));
        meta["seed"] = o.seed;
        meta["oracle"] = monofractal_oracle(0.5);
      } else if (o.kind == "fgn") {
        if (sub->count("--n") == 0) throw UsageError("fgn needs --n");
        const synth::FgnSpec spec{o.hurst, o.n, o.seed};
        spec.validate();
        signal.emplace(synth::fractional_gaussian_noise(spec));
        meta["seed"] = o.seed;
        meta["hurst"] = o.hurst;
        meta["oracle"] = monofractal_oracle(o.hurst);
      } else {
        synth::CascadeSpec spec;
        spec.levels = o.levels;
        spec.multiplier = o.a;
        spec.assignment = o.assignment == "random" ? synth::CascadeAssignment::SeededRandom
                                                   : synth::CascadeAssignment::LeftHeavy;
        spec.seed = o.seed;
        spec.validate();
        if (sub->count("--n") != 0 && o.n != (std::size_t{1} << o.levels)) {
          throw UsageError("cascade length is fixed at 2^levels; drop --n or match it");
        }
        signal.emplace(synth::binomial_cascade(spec));
        meta["seed"] = o.seed;
        meta["a"] = o.a;
        meta["levels"] = o.levels;
        meta["assignment"] = o.assignment;
        meta["oracle"] = cascade_oracle(o.a);
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InvalidInput) throw UsageError(e.what());
      throw;
    }
    meta["n_samples"] = signal->size();
    meta["sample_rate"] = o.rate;
    meta["encoding"] = "float64 little-endian, no header";

    write_f64(*signal, o.out);
    Sink sidecar(o.out + ".json", io.out);
    sidecar.stream() << meta.dump(2) << '\n';
    sidecar.close();
    return kExitOk;
  };
}

}  // namespace mfwidth::cli
