#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfwidth/signal.hpp"

namespace mfwidth {

enum class Segmentation {
  ForwardOnly,  // floor(N/s) segments from the start
  BothEnds,     // the forward pass plus floor(N/s) segments aligned to the end
};

const char* to_string(Segmentation mode);
Segmentation segmentation_from_string(const std::string& name);

struct MfdfaConfig {
  std::vector<std::size_t> scales;  // strictly increasing, in samples
  std::vector<double> q_grid;       // strictly increasing moment orders
  int detrend_order = 1;
  Segmentation segmentation = Segmentation::BothEnds;
  double variance_floor = 1e-30;
  // When set, the quadratic width fit only uses spectrum points with
  // f(alpha) >= fit_min_f.
  std::optional<double> fit_min_f;
  // Threads used over the scale grid. Never changes the result.
  unsigned workers = 1;

  // Default grids for a signal of length n.
  static MfdfaConfig defaults_for(std::size_t n);

  // Throws Error(InvalidInput) when the config cannot be used on a signal of
  // length n.
  void validate(std::size_t n) const;
};

inline constexpr int kMaxDetrendOrder = 3;

// Integers log-spaced over [lo, hi], deduplicated, so the result may hold
// fewer than `count` entries.
std::vector<std::size_t> log_spaced_scales(std::size_t lo, std::size_t hi,
                                           std::size_t count);
std::vector<double> linear_grid(double lo, double hi, std::size_t count);
// 20 log-spaced scales from 16 to n/16.
std::vector<std::size_t> default_scales(std::size_t n);
std::vector<double> default_q_grid();

struct SegmentRange {
  std::size_t begin;
  std::size_t end;  // exclusive

  std::size_t size() const { return end - begin; }
  bool operator==(const SegmentRange&) const = default;
};

std::vector<SegmentRange> segment_bounds(std::size_t n, std::size_t scale,
                                         Segmentation mode);

// Least-squares polynomial detrending for one segment length. The discrete
// orthonormal basis is built once and reused for every segment of that length.
class SegmentDetrender {
 public:
  SegmentDetrender(std::size_t length, int order);

  // Mean squared residual after removing the best-fit polynomial.
  double operator()(std::span<const double> segment) const;

  std::size_t length() const { return length_; }
  int order() const { return order_; }

 private:
  std::size_t length_;
  int order_;
  std::vector<double> basis_;  // (order_ + 1) columns of length_, column-major
};

// F^2(s, v) for a single segment of the profile.
double local_fluctuation(std::span<const double> segment, int order);

// Power mean of order q over segment variances: F_q(s). q == 0 uses the
// geometric-mean limit. Throws DegenerateVariance on any non-positive entry.
double qth_order_fluctuation(std::span<const double> variances, double q);

struct FluctuationSurface {
  std::vector<std::size_t> scales;
  std::vector<double> q_grid;
  std::vector<double> values;  // row-major, values[qi * scales.size() + si]
  std::vector<std::size_t> segment_counts;
  std::vector<std::size_t> floored_counts;

  double at(std::size_t qi, std::size_t si) const {
    return values[qi * scales.size() + si];
  }
};

FluctuationSurface fluctuation_surface(const Profile& profile,
                                       const MfdfaConfig& config);

struct HurstCurve {
  std::vector<double> q_grid;
  std::vector<double> h;
  std::vector<double> intercepts;
  std::vector<double> r_squared;
};

HurstCurve fit_hurst(const FluctuationSurface& surface);

struct ScalingExponents {
  std::vector<double> q_grid;
  std::vector<double> tau;
};

ScalingExponents tau_from_hurst(const HurstCurve& curve);

struct SpectrumPoints {
  std::vector<double> q;
  std::vector<double> alpha;
  std::vector<double> f_alpha;
};

// alpha = h + q h'(q), f = q (alpha - h) + 1, with h' from central differences
// (one-sided at the ends of the q grid).
SpectrumPoints singularity_spectrum(const HurstCurve& curve);

struct SingularitySpectrum {
  std::vector<double> alpha;
  std::vector<double> f_alpha;
  double alpha0 = 0.0;
  double coeff_a = 0.0;
  double coeff_b = 0.0;
  double coeff_c = 0.0;
  double alpha1 = 0.0;  // larger root
  double alpha2 = 0.0;
  double width = 0.0;
  bool degenerate = false;  // monofractal: every alpha equal, width 0
};

// Least-squares fit of f = A (a - a0)^2 + B (a - a0) + C and its zero
// crossings. Points with f below min_f are dropped first when min_f is set.
SingularitySpectrum fit_quadratic_width(const SpectrumPoints& points,
                                        std::optional<double> min_f = {});

// Everything up to (not including) the quadratic width fit.
struct ScalingAnalysis {
  FluctuationSurface surface;
  HurstCurve hurst;
  ScalingExponents tau;
  SpectrumPoints points;
  std::vector<std::string> warnings;
};

struct MfdfaResult : ScalingAnalysis {
  SingularitySpectrum spectrum;
};

ScalingAnalysis mfdfa_scaling(const Signal& signal, const MfdfaConfig& config);
MfdfaResult mfdfa(const Signal& signal, const MfdfaConfig& config);

// Uniform random permutation of the samples, fixed by seed.
Signal shuffle_surrogate(const Signal& signal, std::uint64_t seed);

}  // namespace mfwidth
