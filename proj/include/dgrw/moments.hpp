#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace dgrw {

// Streaming central moments up to fourth order. Single-point updates use
// Pebay's recurrences; merge() uses the pairwise (Chan-style) combination,
// so a fixed block partition reduces to the same result in any thread
// layout as long as blocks are merged in index order.
struct MomentAccumulator {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;

  void add(double x) {
    const double n1 = static_cast<double>(n);
    ++n;
    const double nn = static_cast<double>(n);
    const double delta = x - mean;
    const double delta_n = delta / nn;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    mean += delta_n;
    m4 += term1 * delta_n2 * (nn * nn - 3.0 * nn + 3.0) + 6.0 * delta_n2 * m2 -
          4.0 * delta_n * m3;
    m3 += term1 * delta_n * (nn - 2.0) - 3.0 * delta_n * m2;
    m2 += term1;
  }

  void merge(const MomentAccumulator& b) {
    if (b.n == 0) return;
    if (n == 0) {
      *this = b;
      return;
    }
    const double na = static_cast<double>(n);
    const double nb = static_cast<double>(b.n);
    const double nab = na + nb;
    const double delta = b.mean - mean;
    const double d2 = delta * delta;
    const double m4_new = m4 + b.m4 +
        d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (nab * nab * nab) +
        6.0 * d2 * (na * na * b.m2 + nb * nb * m2) / (nab * nab) +
        4.0 * delta * (na * b.m3 - nb * m3) / nab;
    const double m3_new = m3 + b.m3 +
        delta * d2 * na * nb * (na - nb) / (nab * nab) +
        3.0 * delta * (na * b.m2 - nb * m2) / nab;
    const double m2_new = m2 + b.m2 + d2 * na * nb / nab;
    mean += delta * nb / nab;
    m2 = m2_new;
    m3 = m3_new;
    m4 = m4_new;
    n += b.n;
  }

  // Unbiased sample variance; undefined (NaN) below two samples.
  double variance() const {
    return (n > 1) ? m2 / static_cast<double>(n - 1)
                   : std::numeric_limits<double>::quiet_NaN();
  }

  // Standard error of the sample mean.
  double mean_std_error() const {
    return (n > 1) ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n))
                   : std::numeric_limits<double>::quiet_NaN();
  }

  // Standard error of the sample variance, from the fourth central moment:
  // Var(s^2) = (mu4 - (n-3)/(n-1) sigma^4) / n.
  double variance_std_error() const {
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double nn = static_cast<double>(n);
    const double mu4 = m4 / nn;
    const double s2 = m2 / nn;
    const double v = (mu4 - (nn - 3.0) / (nn - 1.0) * s2 * s2) / nn;
    return std::sqrt(std::fmax(v, 0.0));
  }
};

// Streaming covariance between two observables, mergeable like the above.
struct CovarianceAccumulator {
  std::uint64_t n = 0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double c2 = 0.0;

  void add(double x, double y) {
    ++n;
    const double nn = static_cast<double>(n);
    const double dx = x - mean_x;
    mean_x += dx / nn;
    mean_y += (y - mean_y) / nn;
    c2 += dx * (y - mean_y);
  }

  void merge(const CovarianceAccumulator& b) {
    if (b.n == 0) return;
    if (n == 0) {
      *this = b;
      return;
    }
    const double na = static_cast<double>(n);
    const double nb = static_cast<double>(b.n);
    const double nab = na + nb;
    const double dx = b.mean_x - mean_x;
    const double dy = b.mean_y - mean_y;
    c2 += b.c2 + dx * dy * na * nb / nab;
    mean_x += dx * nb / nab;
    mean_y += dy * nb / nab;
    n += b.n;
  }

  double covariance() const {
    return (n > 1) ? c2 / static_cast<double>(n - 1)
                   : std::numeric_limits<double>::quiet_NaN();
  }
};

}  // namespace dgrw
