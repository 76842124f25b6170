#pragma once

#include <cstdint>
#include <vector>

namespace treecycles {

/// Running mean and variance (Welford), mergeable in a fixed order.
class Moments {
 public:
  void add(double x);
  void merge(const Moments& other);

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance; 0 for fewer than two samples.
  double variance() const;
  /// Standard error of the mean.
  double stderr_of_mean() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value. Ties are
/// handled by comparing the empirical CDFs at distinct values only; +inf is
/// an admissible value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace treecycles
