#pragma once

#include <span>
#include <vector>

namespace mfwidth {

// A finite real-valued sample sequence. Construction validates: at least two
// samples, all finite, positive sample rate.
class Signal {
 public:
  Signal(std::vector<double> samples, double sample_rate = 1.0);

  std::span<const double> samples() const { return samples_; }
  double sample_rate() const { return sample_rate_; }
  std::size_t size() const { return samples_.size(); }

  // Moves the samples out; the Signal is left empty.
  std::vector<double> release() && { return std::move(samples_); }

 private:
  std::vector<double> samples_;
  double sample_rate_;
};

// Cumulative sum of the mean-removed signal.
struct Profile {
  std::vector<double> values;
};

Profile compute_profile(const Signal& signal);

}  // namespace mfwidth
