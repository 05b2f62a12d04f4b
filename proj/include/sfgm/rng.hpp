#pragma once

#include <cstdint>
#include <random>

namespace sfgm {

/// Deterministic random stream. Identical (seed, stream) pairs reproduce the
/// exact variate sequence across runs: the engine output is fixed by the
/// standard and every distribution below is implemented explicitly instead of
/// relying on the library's unspecified algorithms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  /// U[0,1), 53-bit resolution.
  double uniform();
  /// U(0,1), never exactly zero (safe under log).
  double uniform_pos();

  double normal();
  double normal(double mean, double sd);
  double exponential(double rate = 1.0);

  /// Gamma(shape, rate), mean shape/rate. Marsaglia-Tsang.
  double gamma(double shape, double rate = 1.0);
  double chi_squared(double df);

  /// X with 1/X ~ Gamma(shape, rate_of_inverse); mean rate_of_inverse/(shape-1).
  double inverse_gamma(double shape, double rate_of_inverse);

  /// Normal(mean, variance) restricted to (lower, upper); either bound may be
  /// infinite. Inverse-CDF in the bulk, exponential rejection past 4 sd.
  double truncated_normal(double mean, double variance, double lower, double upper);

 private:
  double truncated_standard(double a, double b);
  double tail_exponential_rejection(double a, double b);

  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes a master seed with an index (chain, replicate, ...) into a fresh seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

double normal_cdf(double x);
/// Upper tail probability P(Z > x), accurate for large x.
double normal_cdf_upper(double x);
double normal_quantile(double p);

}  // namespace sfgm
