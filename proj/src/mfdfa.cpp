#include "mfwidth/mfdfa.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "mfwidth/error.hpp"

namespace mfwidth {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorKind::InvalidInput, what);
}

constexpr double kDegenerateSpread = 1e-6;
constexpr double kFlooredWarnFraction = 0.01;
constexpr double kSpectrumPeakSlack = 0.1;

// Largest default scale keeps >= 16 forward segments so high-|q| moments are
// not estimated from a handful of windows.
constexpr std::size_t kDefaultMinScale = 16;
constexpr std::size_t kDefaultScaleDivisor = 16;
constexpr std::size_t kDefaultScaleCount = 20;

}  // namespace

const char* to_string(Segmentation mode) {
  return mode == Segmentation::ForwardOnly ? "forward-only" : "both-ends";
}

Segmentation segmentation_from_string(const std::string& name) {
  if (name == "forward-only" || name == "forward") return Segmentation::ForwardOnly;
  if (name == "both-ends" || name == "both") return Segmentation::BothEnds;
  invalid("unknown segmentation mode '" + name + "'");
}

std::vector<std::size_t> log_spaced_scales(std::size_t lo, std::size_t hi,
                                           std::size_t count) {
  if (lo < 1 || hi < lo || count < 1) {
    invalid("scale grid needs 1 <= lo <= hi and count >= 1");
  }
  std::vector<std::size_t> out;
  out.reserve(count);
  if (count == 1) {
    out.push_back(lo);
    return out;
  }
  const double llo = std::log(static_cast<double>(lo));
  const double lhi = std::log(static_cast<double>(hi));
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    auto s = static_cast<std::size_t>(std::llround(std::exp(llo + t * (lhi - llo))));
    s = std::clamp(s, lo, hi);
    if (out.empty() || s > out.back()) out.push_back(s);
  }
  return out;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  if (count < 1 || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    invalid("linear grid needs lo <= hi and count >= 1");
  }
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + static_cast<double>(i) * step;
  out.back() = hi;
  return out;
}

std::vector<std::size_t> default_scales(std::size_t n) {
  if (n / kDefaultScaleDivisor < kDefaultMinScale) {
    invalid("signal too short for the default scale grid (need >= 256 samples)");
  }
  return log_spaced_scales(kDefaultMinScale, n / kDefaultScaleDivisor, kDefaultScaleCount);
}

std::vector<double> default_q_grid() { return linear_grid(-5.0, 5.0, 41); }

MfdfaConfig MfdfaConfig::defaults_for(std::size_t n) {
  MfdfaConfig config;
  config.scales = default_scales(n);
  config.q_grid = default_q_grid();
  return config;
}

void MfdfaConfig::validate(std::size_t n) const {
  if (detrend_order < 0 || detrend_order > kMaxDetrendOrder) {
    invalid("detrend order must be in [0, 3]");
  }
  if (scales.size() < 3) invalid("need at least 3 scales");
  for (std::size_t i = 1; i < scales.size(); ++i) {
    if (scales[i] <= scales[i - 1]) invalid("scales must be strictly increasing");
  }
  if (scales.front() < static_cast<std::size_t>(detrend_order) + 2) {
    invalid("smallest scale must be at least detrend order + 2");
  }
  if (scales.back() > n / 4) {
    std::ostringstream msg;
    msg << "largest scale " << scales.back() << " exceeds N/4 = " << n / 4;
    invalid(msg.str());
  }
  if (q_grid.size() < 3) invalid("need at least 3 q values");
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    if (!std::isfinite(q_grid[i])) invalid("q values must be finite");
    if (i > 0 && q_grid[i] <= q_grid[i - 1]) {
      invalid("q values must be strictly increasing");
    }
  }
  if (!(variance_floor > 0.0) || !std::isfinite(variance_floor)) {
    invalid("variance floor must be positive");
  }
}

std::vector<SegmentRange> segment_bounds(std::size_t n, std::size_t scale,
                                         Segmentation mode) {
  if (scale == 0) invalid("scale must be positive");
  if (scale > n) throw Error(ErrorKind::ScaleExceedsSignal, "scale exceeds signal");
  const std::size_t count = n / scale;
  std::vector<SegmentRange> out;
  out.reserve(mode == Segmentation::BothEnds ? 2 * count : count);
  for (std::size_t v = 0; v < count; ++v) out.push_back({v * scale, (v + 1) * scale});
  if (mode == Segmentation::BothEnds) {
    const std::size_t offset = n - count * scale;
    for (std::size_t v = 0; v < count; ++v) {
      out.push_back({offset + v * scale, offset + (v + 1) * scale});
    }
  }
  return out;
}

SegmentDetrender::SegmentDetrender(std::size_t length, int order)
    : length_(length), order_(order) {
  if (order < 0 || order > kMaxDetrendOrder) invalid("detrend order must be in [0, 3]");
  if (length < static_cast<std::size_t>(order) + 2) {
    invalid("segment length must be at least detrend order + 2");
  }
  const std::size_t cols = static_cast<std::size_t>(order) + 1;
  basis_.assign(cols * length, 0.0);

  // Monomials of the abscissa mapped onto [-1, 1], orthonormalized by two
  // rounds of modified Gram-Schmidt.
  const double half = 0.5 * static_cast<double>(length - 1);
  for (std::size_t j = 0; j < cols; ++j) {
    double* col = basis_.data() + j * length;
    for (std::size_t i = 0; i < length; ++i) {
      const double t = (static_cast<double>(i) - half) / half;
      col[i] = std::pow(t, static_cast<double>(j));
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        const double* prev = basis_.data() + k * length;
        double dot = 0.0;
        for (std::size_t i = 0; i < length; ++i) dot += col[i] * prev[i];
        for (std::size_t i = 0; i < length; ++i) col[i] -= dot * prev[i];
      }
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < length; ++i) norm += col[i] * col[i];
    norm = std::sqrt(norm);
    if (!(norm > 1e-10)) {
      throw Error(ErrorKind::Internal, "rank-deficient detrending basis");
    }
    for (std::size_t i = 0; i < length; ++i) col[i] /= norm;
  }
}

double SegmentDetrender::operator()(std::span<const double> segment) const {
  if (segment.size() != length_) invalid("segment length does not match detrender");
  const std::size_t n = length_;
  const std::size_t cols = static_cast<std::size_t>(order_) + 1;

  double mean = 0.0;
  for (double y : segment) mean += y;
  mean /= static_cast<double>(n);

  std::array<double, kMaxDetrendOrder + 1> coeff{};
  for (std::size_t j = 0; j < cols; ++j) {
    const double* col = basis_.data() + j * n;
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += (segment[i] - mean) * col[i];
    coeff[j] = dot;
  }

  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = segment[i] - mean;
    for (std::size_t j = 0; j < cols; ++j) r -= coeff[j] * basis_[j * n + i];
    sum_sq += r * r;
  }
  return sum_sq / static_cast<double>(n);
}

double local_fluctuation(std::span<const double> segment, int order) {
  return SegmentDetrender(segment.size(), order)(segment);
}

namespace {

// F_q from precomputed ln F^2 values.
double power_mean_from_logs(std::span<const double> log_var, double q) {
  const double n = static_cast<double>(log_var.size());
  if (q == 0.0) {
    double sum_log = 0.0;
    for (double l : log_var) sum_log += l;
    return std::exp(0.5 * sum_log / n);
  }
  // log-sum-exp keeps large |q| moments of tiny or huge variances in range.
  double peak = -std::numeric_limits<double>::infinity();
  for (double l : log_var) peak = std::max(peak, 0.5 * q * l);
  double sum = 0.0;
  for (double l : log_var) sum += std::exp(0.5 * q * l - peak);
  return std::exp((peak + std::log(sum / n)) / q);
}

}  // namespace

double qth_order_fluctuation(std::span<const double> variances, double q) {
  if (variances.empty()) invalid("no segment variances");
  if (!std::isfinite(q)) invalid("q must be finite");
  std::vector<double> log_var(variances.size());
  for (std::size_t i = 0; i < variances.size(); ++i) {
    const double v = variances[i];
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::DegenerateVariance, "degenerate segment variance");
    }
    log_var[i] = std::log(v);
  }
  return power_mean_from_logs(log_var, q);
}

FluctuationSurface fluctuation_surface(const Profile& profile,
                                       const MfdfaConfig& config) {
  const std::size_t n = profile.values.size();
  config.validate(n);

  const std::size_t ns = config.scales.size();
  const std::size_t nq = config.q_grid.size();
  FluctuationSurface surface;
  surface.scales = config.scales;
  surface.q_grid = config.q_grid;
  surface.values.assign(nq * ns, 0.0);
  surface.segment_counts.assign(ns, 0);
  surface.floored_counts.assign(ns, 0);

  std::vector<std::exception_ptr> failures(ns);
  const std::span<const double> y(profile.values);

  auto process_scale = [&](std::size_t si) {
    try {
      const std::size_t s = config.scales[si];
      const SegmentDetrender detrend(s, config.detrend_order);
      const auto segments = segment_bounds(n, s, config.segmentation);
      std::vector<double> log_variances(segments.size());
      std::size_t floored = 0;
      for (std::size_t v = 0; v < segments.size(); ++v) {
        double f2 = detrend(y.subspan(segments[v].begin, s));
        if (!(f2 >= config.variance_floor)) {
          f2 = config.variance_floor;
          ++floored;
        }
        log_variances[v] = std::log(f2);
      }
      if (floored == segments.size()) {
        throw Error(ErrorKind::DegenerateVariance,
                    "degenerate segment variance: every segment at scale " +
                        std::to_string(s) + " is below the variance floor");
      }
      surface.segment_counts[si] = segments.size();
      surface.floored_counts[si] = floored;
      for (std::size_t qi = 0; qi < nq; ++qi) {
        surface.values[qi * ns + si] = power_mean_from_logs(log_variances, config.q_grid[qi]);
      }
    } catch (...) {
      failures[si] = std::current_exception();
    }
  };

  const std::size_t workers =
      std::clamp<std::size_t>(config.workers == 0 ? 1 : config.workers, 1, ns);
  if (workers == 1) {
    for (std::size_t si = 0; si < ns; ++si) process_scale(si);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t si = w; si < ns; si += workers) process_scale(si);
      });
    }
  }

  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return surface;
}

HurstCurve fit_hurst(const FluctuationSurface& surface) {
  const std::size_t ns = surface.scales.size();
  const std::size_t nq = surface.q_grid.size();
  if (ns < 3) invalid("need at least 3 scales to fit h(q)");
  if (surface.values.size() != ns * nq) invalid("surface shape mismatch");

  std::vector<double> x(ns);
  double mean_x = 0.0;
  for (std::size_t si = 0; si < ns; ++si) {
    x[si] = std::log(static_cast<double>(surface.scales[si]));
    mean_x += x[si];
  }
  mean_x /= static_cast<double>(ns);
  double sxx = 0.0;
  for (double v : x) sxx += (v - mean_x) * (v - mean_x);
  if (!(sxx > 0.0)) invalid("scales must be distinct");

  HurstCurve curve;
  curve.q_grid = surface.q_grid;
  curve.h.resize(nq);
  curve.intercepts.resize(nq);
  curve.r_squared.resize(nq);
  std::vector<double> y(ns);
  for (std::size_t qi = 0; qi < nq; ++qi) {
    double mean_y = 0.0;
    for (std::size_t si = 0; si < ns; ++si) {
      const double f = surface.at(qi, si);
      if (!(f > 0.0) || !std::isfinite(f)) {
        invalid("non-positive fluctuation value; cannot take logarithm");
      }
      y[si] = std::log(f);
      mean_y += y[si];
    }
    mean_y /= static_cast<double>(ns);
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t si = 0; si < ns; ++si) {
      sxy += (x[si] - mean_x) * (y[si] - mean_y);
      syy += (y[si] - mean_y) * (y[si] - mean_y);
    }
    const double slope = sxy / sxx;
    const double intercept = mean_y - slope * mean_x;
    double ss_res = 0.0;
    for (std::size_t si = 0; si < ns; ++si) {
      const double r = y[si] - (intercept + slope * x[si]);
      ss_res += r * r;
    }
    double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    curve.h[qi] = slope;
    curve.intercepts[qi] = intercept;
    curve.r_squared[qi] = std::clamp(r2, 0.0, 1.0);
  }
  return curve;
}

ScalingExponents tau_from_hurst(const HurstCurve& curve) {
  ScalingExponents out;
  out.q_grid = curve.q_grid;
  out.tau.resize(curve.h.size());
  for (std::size_t i = 0; i < curve.h.size(); ++i) {
    out.tau[i] = curve.q_grid[i] * curve.h[i] - 1.0;
  }
  return out;
}

SpectrumPoints singularity_spectrum(const HurstCurve& curve) {
  const auto& q = curve.q_grid;
  const auto& h = curve.h;
  const std::size_t n = q.size();
  if (n < 3 || h.size() != n) invalid("need at least 3 q points for the spectrum");

  SpectrumPoints points;
  points.q = q;
  points.alpha.resize(n);
  points.f_alpha.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
    const double dh = (h[hi] - h[lo]) / (q[hi] - q[lo]);
    points.alpha[i] = h[i] + q[i] * dh;
    points.f_alpha[i] = q[i] * (points.alpha[i] - h[i]) + 1.0;
  }
  return points;
}

SingularitySpectrum fit_quadratic_width(const SpectrumPoints& points,
                                        std::optional<double> min_f) {
  if (points.alpha.size() != points.f_alpha.size()) {
    invalid("alpha and f(alpha) lengths differ");
  }
  const bool have_q = points.q.size() == points.alpha.size();

  std::vector<double> alpha;
  std::vector<double> f;
  std::vector<double> q;
  for (std::size_t i = 0; i < points.alpha.size(); ++i) {
    if (!std::isfinite(points.alpha[i]) || !std::isfinite(points.f_alpha[i])) {
      invalid("non-finite spectrum point");
    }
    if (min_f && points.f_alpha[i] < *min_f) continue;
    alpha.push_back(points.alpha[i]);
    f.push_back(points.f_alpha[i]);
    q.push_back(have_q ? points.q[i] : 0.0);
  }
  if (alpha.size() < 3) invalid("need at least 3 spectrum points for the quadratic fit");

  // alpha0: abscissa of the largest f; ties go to the q nearest zero.
  std::size_t peak = 0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (f[i] > f[peak] || (f[i] == f[peak] && std::abs(q[i]) < std::abs(q[peak]))) {
      peak = i;
    }
  }

  SingularitySpectrum out;
  out.alpha = alpha;
  out.f_alpha = f;
  out.alpha0 = alpha[peak];

  const auto [amin, amax] = std::minmax_element(alpha.begin(), alpha.end());
  if (*amax - *amin < kDegenerateSpread) {
    double mean_f = 0.0;
    for (double v : f) mean_f += v;
    out.coeff_c = mean_f / static_cast<double>(f.size());
    out.alpha1 = out.alpha2 = out.alpha0;
    out.width = 0.0;
    out.degenerate = true;
    return out;
  }

  std::vector<double> distinct = alpha;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) invalid("need at least 3 distinct alpha values");

  const auto m = static_cast<Eigen::Index>(alpha.size());
  Eigen::MatrixXd design(m, 3);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d = alpha[static_cast<std::size_t>(i)] - out.alpha0;
    design(i, 0) = d * d;
    design(i, 1) = d;
    design(i, 2) = 1.0;
    rhs(i) = f[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d coeff = design.colPivHouseholderQr().solve(rhs);
  out.coeff_a = coeff(0);
  out.coeff_b = coeff(1);
  out.coeff_c = coeff(2);

  const double disc = out.coeff_b * out.coeff_b - 4.0 * out.coeff_a * out.coeff_c;
  if (!(out.coeff_a < 0.0) || !(disc >= 0.0)) {
    throw Error(ErrorKind::NonConcaveSpectrum, "spectrum not concave / width undefined");
  }
  const double root = std::sqrt(disc);
  const double r_plus = (-out.coeff_b - root) / (2.0 * out.coeff_a);
  const double r_minus = (-out.coeff_b + root) / (2.0 * out.coeff_a);
  out.alpha1 = out.alpha0 + std::max(r_plus, r_minus);
  out.alpha2 = out.alpha0 + std::min(r_plus, r_minus);
  out.width = root / -out.coeff_a;
  return out;
}

ScalingAnalysis mfdfa_scaling(const Signal& signal, const MfdfaConfig& config) {
  config.validate(signal.size());

  ScalingAnalysis result;
  result.surface = fluctuation_surface(compute_profile(signal), config);
  result.hurst = fit_hurst(result.surface);
  result.tau = tau_from_hurst(result.hurst);
  result.points = singularity_spectrum(result.hurst);

  for (std::size_t si = 0; si < result.surface.scales.size(); ++si) {
    const double fraction = static_cast<double>(result.surface.floored_counts[si]) /
                            static_cast<double>(result.surface.segment_counts[si]);
    if (fraction > kFlooredWarnFraction) {
      std::ostringstream msg;
      msg << "variance floor applied to " << result.surface.floored_counts[si] << " of "
          << result.surface.segment_counts[si] << " segments at scale "
          << result.surface.scales[si];
      result.warnings.push_back(msg.str());
    }
  }
  const double f_max =
      *std::max_element(result.points.f_alpha.begin(), result.points.f_alpha.end());
  if (f_max > 1.0 + kSpectrumPeakSlack) {
    std::ostringstream msg;
    msg << "spectrum peak f(alpha) = " << f_max << " exceeds 1.1";
    result.warnings.push_back(msg.str());
  }
  return result;
}

MfdfaResult mfdfa(const Signal& signal, const MfdfaConfig& config) {
  MfdfaResult result;
  static_cast<ScalingAnalysis&>(result) = mfdfa_scaling(signal, config);
  result.spectrum = fit_quadratic_width(result.points, config.fit_min_f);
  return result;
}

Signal shuffle_surrogate(const Signal& signal, std::uint64_t seed) {
  std::vector<double> samples(signal.samples().begin(), signal.samples().end());
  std::mt19937_64 rng(seed);
  std::shuffle(samples.begin(), samples.end(), rng);
  return Signal(std::move(samples), signal.sample_rate());
}

}  // namespace mfwidth
