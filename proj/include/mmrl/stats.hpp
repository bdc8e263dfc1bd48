#pragma once

#include <cmath>
#include <span>

namespace mmrl {

struct SampleStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n-1 denominator)
  long n = 0;

  double stderr_mean() const { return n > 0 ? std / std::sqrt(double(n)) : 0.0; }
};

/// Compensated (Kahan) two-pass mean and sample standard deviation, so the
/// result is independent of how episodes were scheduled across workers.
inline SampleStats summarize(std::span<const double> xs) {
  SampleStats s;
  s.n = static_cast<long>(xs.size());
  if (s.n == 0) return s;

  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  s.mean = sum / double(s.n);

  if (s.n > 1) {
    double sq = 0.0;
    comp = 0.0;
    for (double x : xs) {
      const double d = (x - s.mean) * (x - s.mean);
      const double y = d - comp;
      const double t = sq + y;
      comp = (t - sq) - y;
      sq = t;
    }
    s.std = std::sqrt(sq / double(s.n - 1));
  }
  return s;
}

}  // namespace mmrl
