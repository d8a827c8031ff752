#ifndef DSMOOTH_LOG_SUM_EXP_HPP
#define DSMOOTH_LOG_SUM_EXP_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace dsmooth {

// log(sum_i exp(x_i)) with max-shift; returns -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> x)
{
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x)
    m = std::max(m, v);
  if (!std::isfinite(m))
    return m;
  double s = 0.0;
  for (double v : x)
    s += std::exp(v - m);
  return m + std::log(s);
}

// Shifts x so that its maximum is zero. Log-domain messages are defined up to a constant.
inline void normalize_max(std::span<double> x)
{
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x)
    m = std::max(m, v);
  if (!std::isfinite(m))
    return;
  for (double& v : x)
    v -= m;
}

}

#endif
