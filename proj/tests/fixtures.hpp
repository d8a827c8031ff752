#ifndef DSMOOTH_TESTS_FIXTURES_HPP
#define DSMOOTH_TESTS_FIXTURES_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dsmooth/decomposition.hpp"
#include "dsmooth/model.hpp"

namespace fixtures {

using namespace dsmooth;

// 1x2 grid, L = 2, theta_u = theta_v = (0, 1), theta_uv = [[0, 2], [2, 0]].
inline GridModel t1()
{
  GridModel m(1, 2, 2);
  m.unary(0)[0] = 0;
  m.unary(0)[1] = 1;
  m.unary(1)[0] = 0;
  m.unary(1)[1] = 1;
  const double table[] = {0, 2, 2, 0};
  std::copy(std::begin(table), std::end(table), m.pairwise(0).begin());
  return m;
}

// Potentials in [-scale, scale], independent of the production generator.
inline GridModel random_model(index h, index w, index labels, std::uint64_t seed,
                              double scale = 1.0)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  GridModel m(h, w, labels);
  for (double& x : m.unary_data())
    x = u(rng);
  for (double& x : m.pairwise_data())
    x = u(rng);
  return m;
}

inline DualVector random_lambda(const GridModel& m, std::uint64_t seed, double scale = 1.0)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  DualVector lambda(m);
  for (double& x : lambda.values())
    x = u(rng);
  return lambda;
}

inline double max_abs(const std::vector<double>& v)
{
  double m = 0.0;
  for (double x : v)
    m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs(std::span<const double> v)
{
  double m = 0.0;
  for (double x : v)
    m = std::max(m, std::abs(x));
  return m;
}

}

#endif
