#include "mfwidth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <unsupported/Eigen/FFT>

#include "mfwidth/error.hpp"

namespace mfwidth::synth {

namespace {
constexpr int kMaxCascadeLevels = 28;
}

void CascadeSpec::validate() const {
  if (levels < 1 || levels > kMaxCascadeLevels) {
    throw Error(ErrorKind::InvalidInput, "cascade levels must be in [1, 28]");
  }
  if (!(multiplier > 0.5 && multiplier < 1.0)) {
    throw Error(ErrorKind::InvalidInput, "cascade multiplier must lie strictly inside (0.5, 1)");
  }
}

void FgnSpec::validate() const {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw Error(ErrorKind::InvalidInput, "Hurst parameter must lie strictly inside (0, 1)");
  }
  if (length < 2) throw Error(ErrorKind::InvalidInput, "fGn length must be at least 2");
}

Signal white_noise(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorKind::InvalidInput, "white noise length must be at least 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = normal(rng);
  return Signal(std::move(x));
}

double fgn_autocovariance(double hurst, std::size_t lag) {
  const double k = static_cast<double>(lag);
  const double two_h = 2.0 * hurst;
  return 0.5 * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) +
                std::pow(std::abs(k - 1.0), two_h));
}

Signal fractional_gaussian_noise(const FgnSpec& spec) {
  spec.validate();
  const std::size_t n = spec.length;
  const std::size_t m = 2 * n;

  // First row of the circulant embedding: gamma(0..n), gamma(n-1..1).
  std::vector<std::complex<double>> row(m);
  for (std::size_t k = 0; k <= n; ++k) row[k] = fgn_autocovariance(spec.hurst, k);
  for (std::size_t k = 1; k < n; ++k) row[m - k] = row[k];

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> eigenvalues;
  fft.fwd(eigenvalues, row);

  double largest = 0.0;
  for (const auto& e : eigenvalues) largest = std::max(largest, e.real());
  std::vector<double> scale(m);
  for (std::size_t k = 0; k < m; ++k) {
    double lambda = eigenvalues[k].real();
    if (lambda < 0.0) {
      if (lambda < -1e-9 * largest) {
        throw Error(ErrorKind::Internal,
                    "circulant embedding is not positive semi-definite");
      }
      lambda = 0.0;
    }
    scale[k] = std::sqrt(lambda / static_cast<double>(m));
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::complex<double>> weights(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    weights[k] = scale[k] * std::complex<double>(re, im);
  }
  std::vector<std::complex<double>> field;
  fft.fwd(field, weights);

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = field[i].real();
  return Signal(std::move(x));
}

Signal binomial_cascade(const CascadeSpec& spec) {
  spec.validate();
  const double a = spec.multiplier;
  const double b = 1.0 - a;
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution coin(0.5);

  std::vector<double> mass{1.0};
  for (int level = 0; level < spec.levels; ++level) {
    std::vector<double> next(mass.size() * 2);
    for (std::size_t i = 0; i < mass.size(); ++i) {
      const bool left_heavy =
          spec.assignment == CascadeAssignment::LeftHeavy || coin(rng);
      next[2 * i] = mass[i] * (left_heavy ? a : b);
      next[2 * i + 1] = mass[i] * (left_heavy ? b : a);
    }
    mass = std::move(next);
  }
  if (mass.size() < 2) throw Error(ErrorKind::Internal, "cascade too short");
  return Signal(std::move(mass));
}

double cascade_tau(double a, double q) {
  return -std::log2(std::pow(a, q) + std::pow(1.0 - a, q));
}

double cascade_hurst(double a, double q) {
  if (q == 0.0) return -std::log2(a * (1.0 - a)) / 2.0;
  return (cascade_tau(a, q) + 1.0) / q;
}

double cascade_alpha(double a, double q) {
  const double b = 1.0 - a;
  const double wa = std::pow(a, q);
  const double wb = std::pow(b, q);
  return -(wa * std::log(a) + wb * std::log(b)) / ((wa + wb) * std::log(2.0));
}

double cascade_f_alpha(double a, double q) {
  return q * cascade_alpha(a, q) - cascade_tau(a, q);
}

double cascade_asymptotic_width(double a) { return std::log2(a / (1.0 - a)); }

}  // namespace mfwidth::synth
