#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfwidth/signal.hpp"

namespace mfwidth::synth {

enum class CascadeAssignment { LeftHeavy, SeededRandom };

struct CascadeSpec {
  int levels = 16;          // series length 2^levels
  double multiplier = 0.75;  // a, strictly inside (0.5, 1)
  CascadeAssignment assignment = CascadeAssignment::LeftHeavy;
  std::uint64_t seed = 0;   // used by SeededRandom only

  void validate() const;
};

struct FgnSpec {
  double hurst = 0.5;
  std::size_t length = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

Signal white_noise(std::size_t n, std::uint64_t seed);

// Exact fractional Gaussian noise by circulant embedding of the fGn
// autocovariance (Davies-Harte / Dietrich-Newsam).
Signal fractional_gaussian_noise(const FgnSpec& spec);

// Autocovariance of unit-variance fGn at integer lag k.
double fgn_autocovariance(double hurst, std::size_t lag);

// Conservative binomial multiplicative cascade; samples sum to 1.
Signal binomial_cascade(const CascadeSpec& spec);

// Analytic exponents of the binomial cascade with multiplier a.
double cascade_tau(double a, double q);
double cascade_hurst(double a, double q);
double cascade_alpha(double a, double q);     // d tau / dq
double cascade_f_alpha(double a, double q);   // q alpha - tau
double cascade_asymptotic_width(double a);    // log2(a / (1 - a))

}  // namespace mfwidth::synth
