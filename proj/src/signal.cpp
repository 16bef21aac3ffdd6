#include "mfwidth/signal.hpp"

#include <cmath>
#include <string>

#include "mfwidth/error.hpp"

namespace mfwidth {

Signal::Signal(std::vector<double> samples, double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (samples_.size() < 2) {
    throw Error(ErrorKind::InvalidInput, "signal needs at least 2 samples");
  }
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
    throw Error(ErrorKind::InvalidInput, "sample rate must be positive");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw Error(ErrorKind::InvalidInput,
                  "non-finite sample at index " + std::to_string(i));
    }
  }
}

Profile compute_profile(const Signal& signal) {
  const auto x = signal.samples();
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / static_cast<double>(x.size());

  Profile profile;
  profile.values.resize(x.size());
  // Kahan-compensated running sum keeps the terminal value near zero for
  // long audio clips.
  double acc = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = (x[i] - mean) - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
    profile.values[i] = acc;
  }
  return profile;
}

}  // namespace mfwidth
