#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mfwidth/error.hpp"
#include "mfwidth/mfdfa.hpp"
#include "mfwidth/synth.hpp"
#include "oracles.hpp"

using namespace mfwidth;

namespace {

FluctuationSurface power_law_surface(double hurst, const std::vector<double>& q) {
  FluctuationSurface s;
  s.scales = {16, 32, 64, 128};
  s.q_grid = q;
  for (std::size_t qi = 0; qi < q.size(); ++qi) {
    for (std::size_t sc : s.scales) s.values.push_back(std::pow(static_cast<double>(sc), hurst));
  }
  s.segment_counts.assign(s.scales.size(), 1);
  s.floored_counts.assign(s.scales.size(), 0);
  return s;
}

MfdfaConfig small_config(std::size_t n) {
  MfdfaConfig c;
  c.scales = log_spaced_scales(16, n / 16, 12);
  c.q_grid = linear_grid(-5, 5, 21);
  return c;
}

}  // namespace

TEST_CASE("profile examples") {
  CHECK(compute_profile(Signal({1, 1, 1})).values == std::vector<double>{0, 0, 0});
  const auto p = compute_profile(Signal({1, 2, 3}));
  CHECK(p.values[0] == doctest::Approx(-1));
  CHECK(p.values[1] == doctest::Approx(-1));
  CHECK(std::abs(p.values[2]) < 1e-15);
}

TEST_CASE("profile terminal value vanishes") {
  for (unsigned seed : {42u, 1u, 2u}) {
    const auto x = oracle::gaussian(1000, seed);
    const auto p = compute_profile(Signal(x));
    CHECK(std::abs(p.values.back()) <= 1e-9 * 1000);
    // Independent long-double cumulative sum.
    long double mean = 0;
    for (double v : x) mean += v;
    mean /= x.size();
    long double acc = 0;
    double worst = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      acc += x[i] - mean;
      worst = std::max(worst, static_cast<double>(std::abs(acc - p.values[i])));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("signal rejects bad input") {
  CHECK_THROWS_AS(Signal({1.0}), Error);
  CHECK_THROWS_AS(Signal({1.0, NAN}), Error);
  CHECK_THROWS_AS(Signal({1.0, INFINITY}), Error);
  CHECK_THROWS_AS(Signal({1.0, 2.0}, 0.0), Error);
}

TEST_CASE("segment bounds") {
  CHECK(segment_bounds(1000, 300, Segmentation::ForwardOnly).size() == 3);
  const std::vector<SegmentRange> both = {{0, 3}, {3, 6}, {6, 9}, {1, 4}, {4, 7}, {7, 10}};
  CHECK(segment_bounds(10, 3, Segmentation::BothEnds) == both);
  const auto full = segment_bounds(8, 8, Segmentation::BothEnds);
  REQUIRE(full.size() == 2);
  CHECK(full[0] == SegmentRange{0, 8});
  CHECK(full[1] == SegmentRange{0, 8});
  try {
    segment_bounds(10, 11, Segmentation::ForwardOnly);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ScaleExceedsSignal);
    CHECK(std::string(e.what()) == "scale exceeds signal");
  }
}

TEST_CASE("segmentation names round-trip") {
  for (auto m : {Segmentation::ForwardOnly, Segmentation::BothEnds}) {
    CHECK(segmentation_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(segmentation_from_string("sideways"), Error);
}

TEST_CASE("local fluctuation examples") {
  const std::vector<double> line = {0.5, 1.5, 2.5, 3.5, 4.5};
  CHECK(local_fluctuation(line, 1) == doctest::Approx(0.0).epsilon(1e-15));
  const std::vector<double> bump = {0, 0, 1};
  CHECK(local_fluctuation(bump, 1) == doctest::Approx(1.0 / 18.0).epsilon(1e-14));
  const std::vector<double> pair = {1, -1};
  CHECK(local_fluctuation(pair, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(local_fluctuation(bump, 2), Error);
}

TEST_CASE("local fluctuation matches the naive least-squares oracle") {
  double worst = 0;
  std::size_t checked = 0;
  for (std::size_t n : {8u, 13u, 32u, 47u, 64u}) {
    for (unsigned seed = 0; seed < 3; ++seed) {
      const auto x = oracle::gaussian(n, 100 * seed + static_cast<unsigned>(n));
      const auto profile = compute_profile(Signal(x));
      for (int order = 0; order <= kMaxDetrendOrder; ++order) {
        for (std::size_t s = static_cast<std::size_t>(order) + 2; s <= std::min<std::size_t>(n, 16);
             ++s) {
          const SegmentDetrender detrend(s, order);
          for (const auto& r : segment_bounds(n, s, Segmentation::BothEnds)) {
            const std::span<const double> seg(profile.values.data() + r.begin, r.size());
            const std::vector<long double> y(seg.begin(), seg.end());
            const long double want = oracle::detrended_variance(y, order);
            const double got = detrend(seg);
            const double tol = 1e-12 * std::max(1.0L, want);
            worst = std::max(worst, static_cast<double>(std::abs(got - want)));
            CHECK(std::abs(got - want) <= tol);
            CHECK(local_fluctuation(seg, order) == got);
            ++checked;
          }
        }
      }
    }
  }
  CHECK(checked > 1000);
  MESSAGE("worst F^2 deviation " << worst);
}

TEST_CASE("power-mean examples") {
  const std::vector<double> c2(5, 0.09);
  for (double q : {-5.0, -1.0, 0.0, 0.5, 3.0}) {
    CHECK(qth_order_fluctuation(c2, q) == doctest::Approx(0.3).epsilon(1e-14));
  }
  const std::vector<double> v = {1, 4};
  CHECK(qth_order_fluctuation(v, 2) == doctest::Approx(std::sqrt(2.5)).epsilon(1e-14));
  CHECK(qth_order_fluctuation(v, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(qth_order_fluctuation(v, -2) == doctest::Approx(std::pow(0.625, -0.5)).epsilon(1e-14));
  const std::vector<double> zero = {1, 0};
  try {
    qth_order_fluctuation(zero, 2);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateVariance);
  }
}

TEST_CASE("power mean agrees with a long-double oracle") {
  std::mt19937 rng(5);
  std::lognormal_distribution<double> d(0.0, 3.0);
  std::vector<double> v(200);
  for (auto& x : v) x = d(rng);
  for (double q : linear_grid(-5, 5, 41)) {
    const double want = static_cast<double>(oracle::power_mean(v, q));
    CHECK(qth_order_fluctuation(v, q) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("q = 0 is the limit of small |q|") {
  std::mt19937 rng(9);
  std::lognormal_distribution<double> d(0.0, 2.0);
  std::vector<double> v(64);
  for (auto& x : v) x = d(rng);
  const double f0 = qth_order_fluctuation(v, 0.0);
  for (double q : {1e-4, -1e-4}) {
    CHECK(std::abs(qth_order_fluctuation(v, q) - f0) <= 1e-3 * f0);
  }
}

TEST_CASE("fluctuation surface is non-decreasing in q") {
  const auto x = synth::binomial_cascade({12, 0.7, synth::CascadeAssignment::LeftHeavy, 0});
  const auto profile = compute_profile(x);
  MfdfaConfig c = small_config(x.size());
  c.q_grid = linear_grid(-8, 8, 65);
  const auto surface = fluctuation_surface(profile, c);
  for (std::size_t si = 0; si < surface.scales.size(); ++si) {
    for (std::size_t qi = 1; qi < surface.q_grid.size(); ++qi) {
      CHECK(surface.at(qi, si) >= surface.at(qi - 1, si) * (1 - 1e-12));
    }
  }
  for (double v : surface.values) CHECK((std::isfinite(v) && v > 0));
}

TEST_CASE("segment counts follow the segmentation mode") {
  const auto x = synth::white_noise(1000, 3);
  const auto profile = compute_profile(x);
  MfdfaConfig c;
  c.scales = {16, 50, 250};
  c.q_grid = {-1, 0, 1};
  c.segmentation = Segmentation::ForwardOnly;
  CHECK(fluctuation_surface(profile, c).segment_counts == std::vector<std::size_t>{62, 20, 4});
  c.segmentation = Segmentation::BothEnds;
  CHECK(fluctuation_surface(profile, c).segment_counts == std::vector<std::size_t>{124, 40, 8});
}

TEST_CASE("config validation") {
  MfdfaConfig c;
  c.scales = {16, 32, 64};
  c.q_grid = {-1, 0, 1};
  CHECK_NOTHROW(c.validate(256));
  CHECK_THROWS_AS(c.validate(255), Error);  // 64 > 255 / 4
  auto bad = c;
  bad.detrend_order = 4;
  CHECK_THROWS_AS(bad.validate(1024), Error);
  bad = c;
  bad.scales = {2, 4, 8};
  bad.detrend_order = 1;
  CHECK_THROWS_AS(bad.validate(1024), Error);  // 2 < order + 2
  bad.scales = {3, 4, 8};
  CHECK_NOTHROW(bad.validate(1024));
  bad = c;
  bad.scales = {16, 16, 32};
  CHECK_THROWS_AS(bad.validate(1024), Error);
  bad = c;
  bad.q_grid = {1, 0, 2};
  CHECK_THROWS_AS(bad.validate(1024), Error);
  bad = c;
  bad.q_grid = {0, 1};
  CHECK_THROWS_AS(bad.validate(1024), Error);
  bad = c;
  bad.variance_floor = 0;
  CHECK_THROWS_AS(bad.validate(1024), Error);
}

TEST_CASE("default grids") {
  const auto q = default_q_grid();
  REQUIRE(q.size() == 41);
  CHECK(q.front() == -5.0);
  CHECK(q.back() == 5.0);
  CHECK(q[20] == 0.0);
  const auto s = default_scales(65536);
  CHECK(s.front() == 16);
  CHECK(s.back() == 4096);
  CHECK(s.size() == 20);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
  const auto dedup = log_spaced_scales(16, 20, 20);
  CHECK(dedup == std::vector<std::size_t>{16, 17, 18, 19, 20});
}

TEST_CASE("exact power law gives its exponent") {
  const auto surface = power_law_surface(0.7, {-1, 0, 1, 2});
  const auto curve = fit_hurst(surface);
  for (std::size_t i = 0; i < curve.h.size(); ++i) {
    CHECK(curve.h[i] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(curve.r_squared[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("hurst fit matches an independent regression") {
  const auto x = synth::white_noise(8192, 4);
  MfdfaConfig c = small_config(x.size());
  const auto surface = fluctuation_surface(compute_profile(x), c);
  const auto curve = fit_hurst(surface);
  std::vector<double> ls;
  for (auto s : surface.scales) ls.push_back(std::log(static_cast<double>(s)));
  for (std::size_t qi = 0; qi < surface.q_grid.size(); ++qi) {
    std::vector<double> lf;
    for (std::size_t si = 0; si < surface.scales.size(); ++si) lf.push_back(std::log(surface.at(qi, si)));
    CHECK(curve.h[qi] == doctest::Approx(oracle::slope(ls, lf)).epsilon(1e-10));
    CHECK(curve.r_squared[qi] >= 0.0);
    CHECK(curve.r_squared[qi] <= 1.0);
  }
}

TEST_CASE("tau identity") {
  HurstCurve c;
  c.q_grid = {-1, 0, 2, 3};
  c.h = {0.9, 0.7, 0.5, 0.8390};
  c.intercepts.assign(4, 0.0);
  c.r_squared.assign(4, 1.0);
  const auto t = tau_from_hurst(c);
  for (std::size_t i = 0; i < 4; ++i) CHECK(t.tau[i] == c.q_grid[i] * c.h[i] - 1.0);
  CHECK(t.tau[2] == 0.0);
  CHECK(t.tau[1] == -1.0);
  HurstCurve cascade;
  cascade.q_grid = {1, 2, 3};
  cascade.h = {0.9, oracle::cascade_h(0.75, 2.0), 0.8};
  CHECK(cascade.h[1] == doctest::Approx(0.8390).epsilon(1e-4));
  CHECK(std::abs(tau_from_hurst(cascade).tau[1] - 0.6781) < 1e-4);
}

TEST_CASE("monofractal surface gives a degenerate spectrum") {
  const auto curve = fit_hurst(power_law_surface(0.6, linear_grid(-5, 5, 41)));
  const auto pts = singularity_spectrum(curve);
  for (std::size_t i = 0; i < pts.alpha.size(); ++i) {
    CHECK(pts.alpha[i] == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(pts.f_alpha[i] == doctest::Approx(1.0).epsilon(1e-9));
  }
  const auto spec = fit_quadratic_width(pts);
  CHECK(spec.degenerate);
  CHECK(spec.width < 1e-6);
}

TEST_CASE("spectrum matches the analytic cascade derivative on a fine grid") {
  const double a = 0.75;
  HurstCurve c;
  c.q_grid = linear_grid(-5, 5, 101);
  for (double q : c.q_grid) c.h.push_back(oracle::cascade_h(a, q));
  const auto pts = singularity_spectrum(c);
  for (std::size_t i = 1; i + 1 < pts.q.size(); ++i) {
    const double q = pts.q[i];
    const double pa = std::pow(a, q), pb = std::pow(1 - a, q);
    const double dtau = -(pa * std::log(a) + pb * std::log(1 - a)) / ((pa + pb) * std::log(2.0));
    CHECK(std::abs(pts.alpha[i] - dtau) < 1e-3);
    CHECK(pts.f_alpha[i] == doctest::Approx(q * dtau - oracle::cascade_tau(a, q)).epsilon(1e-2));
  }
  // Information dimension at q = 1.
  const auto one = std::find(pts.q.begin(), pts.q.end(), 1.0) - pts.q.begin();
  CHECK(pts.alpha[static_cast<std::size_t>(one)] == doctest::Approx(0.8113).epsilon(1e-3));
}

TEST_CASE("spectrum needs three q points") {
  HurstCurve c;
  c.q_grid = {0, 1};
  c.h = {0.5, 0.5};
  CHECK_THROWS_AS(singularity_spectrum(c), Error);
}

TEST_CASE("exact parabola width") {
  SpectrumPoints p;
  for (int i = 0; i <= 10; ++i) {
    const double a = 0.3 + 0.1 * i;
    p.q.push_back(i - 5);
    p.alpha.push_back(a);
    p.f_alpha.push_back(1 - (a - 0.8) * (a - 0.8));
  }
  const auto s = fit_quadratic_width(p);
  CHECK(std::abs(s.width - 2.0) < 1e-9);
  CHECK(std::abs(s.alpha1 - 1.8) < 1e-9);
  CHECK(std::abs(s.alpha2 + 0.2) < 1e-9);
  CHECK(s.coeff_a < 0);
  CHECK(s.alpha1 - s.alpha2 == doctest::Approx(s.width));
}

TEST_CASE("asymmetric quadratic width") {
  SpectrumPoints p;
  const double a0 = 1.0;
  for (int i = -6; i <= 6; ++i) {
    const double d = 0.1 * i;
    p.q.push_back(i);
    p.alpha.push_back(a0 + d);
    p.f_alpha.push_back(1 + 0.1 * d - d * d);
  }
  const auto s = fit_quadratic_width(p);
  CHECK(std::abs(s.width - std::sqrt(4.01)) < 1e-9);
}

TEST_CASE("convex points are rejected") {
  SpectrumPoints p;
  for (int i = -3; i <= 3; ++i) {
    p.q.push_back(i);
    p.alpha.push_back(0.5 + 0.1 * i);
    p.f_alpha.push_back(0.5 + 0.1 * i * i);
  }
  try {
    fit_quadratic_width(p);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonConcaveSpectrum);
    CHECK(std::string(e.what()) == "spectrum not concave / width undefined");
  }
}

TEST_CASE("fit window drops low points") {
  SpectrumPoints p;
  for (int i = 0; i <= 20; ++i) {
    const double a = 0.05 * i;
    p.q.push_back(i - 10);
    p.alpha.push_back(a);
    p.f_alpha.push_back(1 - 4 * (a - 0.5) * (a - 0.5));
  }
  p.f_alpha.front() = -3;  // outlier below the window
  const auto all = fit_quadratic_width(p);
  const auto windowed = fit_quadratic_width(p, 0.0);
  CHECK(std::abs(windowed.width - 1.0) < 1e-9);
  CHECK(std::abs(all.width - 1.0) > 1e-3);
}

TEST_CASE("alpha0 ties go to the q nearest zero") {
  SpectrumPoints p;
  p.q = {-2, -1, 1, 2};
  p.alpha = {1.2, 1.0, 0.9, 0.7};
  p.f_alpha = {0.5, 1.0, 1.0, 0.5};
  CHECK(fit_quadratic_width(p).alpha0 == 1.0);
  p.q = {-2, -0.5, 1, 2};
  CHECK(fit_quadratic_width(p).alpha0 == 1.0);
  p.q = {-2, -1.5, 1, 2};
  CHECK(fit_quadratic_width(p).alpha0 == 0.9);
}

TEST_CASE("constant signal fails at the fluctuation stage") {
  const Signal x(std::vector<double>(4096, 0.25));
  try {
    mfdfa(x, MfdfaConfig::defaults_for(x.size()));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateVariance);
  }
}

TEST_CASE("sparse signal floors variances and warns") {
  // Zero-sum burst then silence: the profile is flat after the burst.
  std::vector<double> v(8192, 0.0);
  for (std::size_t i = 0; i < 512; i += 2) {
    v[i] = std::sin(0.37 * i * i);
    v[i + 1] = -v[i];
  }
  MfdfaConfig c;
  c.scales = {16, 32, 64, 128};
  c.q_grid = {-2, 0, 2};
  c.detrend_order = 0;
  const auto r = mfdfa_scaling(Signal(v), c);
  CHECK(r.surface.floored_counts[0] > 0);
  CHECK(!r.warnings.empty());
}

TEST_CASE("affine transforms leave h(q) unchanged") {
  const auto x = synth::binomial_cascade({13, 0.7, synth::CascadeAssignment::SeededRandom, 3});
  const MfdfaConfig c = small_config(x.size());
  const auto base = mfdfa_scaling(x, c);
  for (auto [scale, shift] : {std::pair{3.5, -2.0}, std::pair{-0.01, 100.0}, std::pair{1e4, 0.0}}) {
    std::vector<double> y(x.samples().begin(), x.samples().end());
    for (auto& v : y) v = scale * v + shift;
    const auto moved = mfdfa_scaling(Signal(y), c);
    for (std::size_t i = 0; i < base.hurst.h.size(); ++i) {
      CHECK(std::abs(moved.hurst.h[i] - base.hurst.h[i]) <= 1e-6);
      CHECK(moved.hurst.intercepts[i] - base.hurst.intercepts[i] ==
            doctest::Approx(std::log(std::abs(scale))).epsilon(1e-6));
    }
  }
}

TEST_CASE("worker count never changes the result") {
  const auto x = synth::white_noise(1 << 14, 11);
  MfdfaConfig c = MfdfaConfig::defaults_for(x.size());
  c.workers = 1;
  const auto one = mfdfa_scaling(x, c);
  for (unsigned w : {2u, 3u, 8u}) {
    c.workers = w;
    const auto many = mfdfa_scaling(x, c);
    CHECK(many.surface.values == one.surface.values);
    CHECK(many.hurst.h == one.hurst.h);
    CHECK(many.points.alpha == one.points.alpha);
  }
}

TEST_CASE("repeated runs are identical") {
  const auto x = synth::binomial_cascade({14, 0.75, synth::CascadeAssignment::LeftHeavy, 0});
  const auto c = MfdfaConfig::defaults_for(x.size());
  const auto a = mfdfa(x, c);
  const auto b = mfdfa(x, c);
  CHECK(a.spectrum.width == b.spectrum.width);
  CHECK(a.surface.values == b.surface.values);
}

TEST_CASE("tau(2) equals 2 h(2) - 1 on pipeline output") {
  const auto x = synth::white_noise(1 << 13, 2);
  const auto r = mfdfa_scaling(x, MfdfaConfig::defaults_for(x.size()));
  const auto two = std::find(r.hurst.q_grid.begin(), r.hurst.q_grid.end(), 2.0) - r.hurst.q_grid.begin();
  const auto i = static_cast<std::size_t>(two);
  CHECK(r.tau.tau[i] == 2.0 * r.hurst.h[i] - 1.0);
}

TEST_CASE("cascade spectrum is wide and noise is narrow") {
  const auto cascade = synth::binomial_cascade({16, 0.75, synth::CascadeAssignment::LeftHeavy, 0});
  CHECK(mfdfa(cascade, MfdfaConfig::defaults_for(cascade.size())).spectrum.width > 1.0);
  const auto noise = synth::white_noise(1 << 16, 7);
  CHECK(mfdfa(noise, MfdfaConfig::defaults_for(noise.size())).spectrum.width <= 0.2);
}

TEST_CASE("cascade partition function follows the analytic tau") {
  // At dyadic scales the box masses of a left-heavy cascade are exact
  // products of multipliers, so the partition sum is known in closed form.
  const double a = 0.75;
  const int levels = 14;
  const auto x = synth::binomial_cascade({levels, a, synth::CascadeAssignment::LeftHeavy, 0});
  double total = 0;
  for (double v : x.samples()) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  for (int box_level = 2; box_level <= 10; box_level += 4) {
    const std::size_t box = x.size() >> box_level;
    for (double q : {-2.0, 0.5, 2.0, 4.0}) {
      long double z = 0;
      for (std::size_t b = 0; b < x.size(); b += box) {
        long double m = 0;
        for (std::size_t i = b; i < b + box; ++i) m += x.samples()[i];
        z += std::pow(m, static_cast<long double>(q));
      }
      const double want = std::pow(std::pow(a, q) + std::pow(1 - a, q), box_level);
      CHECK(static_cast<double>(z) == doctest::Approx(want).epsilon(1e-9));
      CHECK(-std::log2(static_cast<double>(z)) / box_level ==
            doctest::Approx(oracle::cascade_tau(a, q)).epsilon(1e-9));
    }
  }
}

TEST_CASE("shuffle surrogate") {
  const auto x = synth::white_noise(500, 1);
  const auto a = shuffle_surrogate(x, 9);
  const auto b = shuffle_surrogate(x, 9);
  CHECK(std::equal(a.samples().begin(), a.samples().end(), b.samples().begin()));
  std::vector<double> s0(x.samples().begin(), x.samples().end());
  std::vector<double> s1(a.samples().begin(), a.samples().end());
  CHECK(s0 != s1);
  std::sort(s0.begin(), s0.end());
  std::sort(s1.begin(), s1.end());
  CHECK(s0 == s1);
  CHECK(a.sample_rate() == x.sample_rate());
}
