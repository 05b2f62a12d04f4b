#include "sfgm/rng.hpp"

#include <cmath>
#include <limits>

#include "sfgm/errors.hpp"

namespace sfgm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index * 0xD1B54A32D192ED03ULL + 1));
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : engine_(derive_seed(seed, stream)) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_pos() {
  double u;
  do {
    u = uniform();
  } while (u <= 0.0);
  return u;
}

double RngStream::normal() {
  // Marsaglia polar, cached second variate.
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  have_spare_ = true;
  return u * factor;
}

double RngStream::normal(double mean, double sd) { return mean + sd * normal(); }

double RngStream::exponential(double rate) {
  if (rate <= 0.0) fail(ErrorCode::InvalidParameter, "exponential: rate must be positive");
  return -std::log(uniform_pos()) / rate;
}

double RngStream::gamma(double shape, double rate) {
  if (shape <= 0.0 || rate <= 0.0)
    fail(ErrorCode::InvalidParameter, "gamma: shape and rate must be positive");
  if (shape < 1.0) {
    const double boost = std::pow(uniform_pos(), 1.0 / shape);
    return gamma(shape + 1.0, rate) * boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v / rate;
  }
}

double RngStream::chi_squared(double df) { return 2.0 * gamma(0.5 * df, 1.0); }

double RngStream::inverse_gamma(double shape, double rate_of_inverse) {
  if (shape <= 0.0 || rate_of_inverse <= 0.0)
    fail(ErrorCode::InvalidParameter, "inverse_gamma: parameters must be positive");
  return 1.0 / gamma(shape, rate_of_inverse);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double normal_cdf_upper(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    fail(ErrorCode::InvalidParameter, "normal_quantile: p outside (0,1)");
  // Acklam's rational approximation plus one Halley correction.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (std::abs(x) < 37.0) {
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double RngStream::tail_exponential_rejection(double a, double b) {
  // Robert (1995): shifted exponential proposal for the upper tail,
  // additionally rejecting draws past a finite b.
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (int trial = 0; trial < 100000; ++trial) {
    const double z = a + exponential(alpha);
    if (z > b) continue;
    const double diff = z - alpha;
    if (uniform() <= std::exp(-0.5 * diff * diff)) return z;
  }
  // Extremely narrow far-tail interval: fall back to CDF-space inversion.
  const double qa = normal_cdf_upper(a);
  const double qb = (b == kInf) ? 0.0 : normal_cdf_upper(b);
  const double q = qb + (qa - qb) * uniform_pos();
  if (q <= 0.0 || qa == qb) return a + (b - a) * uniform();
  return -normal_quantile(q);
}

double RngStream::truncated_standard(double a, double b) {
  if (a == -kInf && b == kInf) return normal();
  if (a == -kInf) return -truncated_standard(-b, kInf);
  if (a >= 4.0) return tail_exponential_rejection(a, b);
  if (b <= -4.0) return -tail_exponential_rejection(-b, -a);
  if (b == kInf) {
    // P(Z > a) is at least Phi_c(4); inverse CDF in the upper-tail space.
    const double qa = normal_cdf_upper(a);
    return -normal_quantile(qa * uniform_pos());
  }
  const double pa = normal_cdf(a);
  const double pb = normal_cdf(b);
  if (!(pb > pa)) return a + (b - a) * uniform();
  const double p = pa + (pb - pa) * uniform_pos();
  return normal_quantile(p);
}

double RngStream::truncated_normal(double mean, double variance, double lower,
                                   double upper) {
  if (!(variance > 0.0))
    fail(ErrorCode::InvalidParameter, "truncated_normal: variance must be positive");
  if (!(lower < upper))
    fail(ErrorCode::EmptyInterval, "truncated_normal: lower >= upper");
  const double sd = std::sqrt(variance);
  const double a = (lower - mean) / sd;
  const double b = (upper - mean) / sd;
  double x = mean + sd * truncated_standard(a, b);
  // Contract: draws lie strictly inside the interval.
  if (x <= lower) x = std::nextafter(lower, upper);
  if (x >= upper) x = std::nextafter(upper, lower);
  return x;
}

}  // namespace sfgm
