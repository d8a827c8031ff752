#include <doctest.h>

#include <cmath>

#include "dsmooth/decomposition.hpp"
#include "dsmooth/errors.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace dsmooth;
using doctest::Approx;

namespace {

// Frozen from a 40-digit enumeration of the four T1 labelings at lambda = 0, rho = 1.
constexpr double t1_smoothed_h = -0.42660634130636013;
constexpr double t1_smoothed_v = -0.94815396836021336;
constexpr double t1_marginal_h_u0 = 0.70629900804009829;
constexpr double t1_marginal_v_u0 = 0.62245933120185456;
constexpr double t1_d_rho = -2.2603161996275467;

}

TEST_CASE("split_grid")
{
  SUBCASE("3x3")
  {
    const auto dec = split_grid(GridModel(3, 3, 2));
    CHECK(dec.edge_sets[0].size() == 6);
    CHECK(dec.edge_sets[1].size() == 6);
    CHECK(dec.chains[0].size() == 3);
    CHECK(dec.chains[1].size() == 3);
    CHECK(dec.chains[1][2].nodes == std::vector<index>{2, 5, 8});
    for (int v : dec.node_multiplicity)
      CHECK(v == 2);
    for (int e : dec.edge_multiplicity)
      CHECK(e == 1);
  }
  SUBCASE("T1")
  {
    const auto dec = split_grid(fixtures::t1());
    CHECK(dec.edge_sets[0] == std::vector<index>{0});
    CHECK(dec.edge_sets[1].empty());
    CHECK(dec.chains[1].size() == 2);
    CHECK(dec.chains[1][0].nodes.size() == 1);
  }
  SUBCASE("1x1")
  {
    const auto dec = split_grid(GridModel(1, 1, 3));
    CHECK(dec.edge_sets[0].empty());
    CHECK(dec.edge_sets[1].empty());
  }
  SUBCASE("every edge in exactly one subgraph, every node in both")
  {
    const GridModel m(4, 5, 2);
    const auto dec = split_grid(m);
    std::vector<int> seen(m.edge_count(), 0);
    for (int i = 0; i < 2; ++i)
      for (index e : dec.edge_sets[i])
        ++seen[e];
    for (int s : seen)
      CHECK(s == 1);
    for (int i = 0; i < 2; ++i) {
      index nodes = 0;
      for (const auto& chain : dec.chains[i]) {
        nodes += chain.nodes.size();
        CHECK(chain.edges.size() + 1 == chain.nodes.size());
      }
      CHECK(nodes == m.node_count());
    }
  }
}

TEST_CASE("reparametrize")
{
  const auto m = fixtures::t1();
  DualVector lambda(m);
  lambda(0, 0) = 0.5;
  lambda(0, 1) = -0.5;
  const auto t0 = reparametrize(m, lambda, 0);
  const auto t1 = reparametrize(m, lambda, 1);
  CHECK(t0[0] == 0.5);
  CHECK(t0[1] == 0.0);
  CHECK(t1[0] == -0.5);
  CHECK(t1[1] == 1.0);
  CHECK(t0[3] == 0.5);

  const auto r = fixtures::random_model(3, 3, 3, 11);
  const auto rl = fixtures::random_lambda(r, 12);
  const auto a = reparametrize(r, rl, 0);
  const auto b = reparametrize(r, rl, 1);
  for (index k = 0; k < a.size(); ++k)
    CHECK(a[k] + b[k] == Approx(r.unary_data()[k]).epsilon(1e-15));
}

TEST_CASE("dual value")
{
  const auto m = fixtures::t1();
  const auto dec = split_grid(m);
  const DualVector zero(m);
  CHECK(chain_min_energy(m, dec, reparametrize(m, zero, 1), 1) == 0.0);
  CHECK(chain_min_energy(m, dec, reparametrize(m, zero, 0), 0) == 0.0);
  CHECK(dual_value(m, dec, zero) == 0.0);
  const GridModel z(3, 2, 3);
  CHECK(dual_value(z, split_grid(z), DualVector(z)) == 0.0);
}

TEST_CASE("dual value matches subgraph enumeration and bounds the energy")
{
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto m = fixtures::random_model(2 + seed % 2, 2, 2 + seed % 2, seed);
    const auto dec = split_grid(m);
    const auto lambda = fixtures::random_lambda(m, seed + 100);
    const double u = dual_value(m, dec, lambda);
    const double expected = oracle::enum_subgraph_min(m, lambda, 0) + oracle::enum_subgraph_min(m, lambda, 1);
    CHECK(u == Approx(expected).epsilon(1e-12));
    CHECK(u <= oracle::enum_min_energy(m).second + 1e-12);
  }
}

TEST_CASE("smoothed dual on T1")
{
  const auto m = fixtures::t1();
  const auto dec = split_grid(m);
  const DualVector zero(m);
  CHECK(smoothed_dual(m, dec, zero, 1.0) == Approx(t1_smoothed_h + t1_smoothed_v).epsilon(1e-14));
  CHECK(oracle::enum_softmin(m, zero, 0, 1.0) == Approx(t1_smoothed_h).epsilon(1e-14));
  CHECK(oracle::enum_softmin(m, zero, 1, 1.0) == Approx(t1_smoothed_v).epsilon(1e-14));
  CHECK(std::abs(smoothed_dual(m, dec, zero, 1e-6) - dual_value(m, dec, zero)) < 1e-5);
  CHECK_THROWS_AS(smoothed_dual(m, dec, zero, 0.0), input_error);
  CHECK_THROWS_AS(chain_marginals(m, dec, zero, -1.0), input_error);

  const GridModel single(1, 1, 2);
  CHECK(smoothed_dual(single, split_grid(single), DualVector(single), 1.0)
        == Approx(-2 * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("smoothed dual is stable for tiny rho and large potentials")
{
  auto m = fixtures::random_model(3, 3, 3, 5, 1000.0);
  const auto dec = split_grid(m);
  const auto lambda = fixtures::random_lambda(m, 6, 100.0);
  const double u = dual_value(m, dec, lambda);
  const double s = smoothed_dual(m, dec, lambda, 1e-4);
  CHECK(std::isfinite(s));
  CHECK(s <= u + 1e-9);
  CHECK(u <= s + 2e-4 * m.log_labelspace() + 1e-9);
}

TEST_CASE("chain marginals on T1")
{
  const auto m = fixtures::t1();
  const auto dec = split_grid(m);
  const auto nu = chain_marginals(m, dec, DualVector(m), 1.0);
  CHECK(nu.node(0, 0)[0] == Approx(t1_marginal_h_u0).epsilon(1e-14));
  CHECK(nu.node(0, 0)[1] == Approx(1 - t1_marginal_h_u0).epsilon(1e-14));
  CHECK(nu.node(1, 0)[0] == Approx(t1_marginal_v_u0).epsilon(1e-14));
  CHECK(nu.node(1, 0)[0] == Approx(1 / (1 + std::exp(-0.5))).epsilon(1e-14));

  const GridModel zero(2, 3, 4);
  const auto uniform = chain_marginals(zero, split_grid(zero), DualVector(zero), 0.3);
  for (int i = 0; i < 2; ++i)
    for (double p : uniform.unary[i])
      CHECK(p == Approx(0.25).epsilon(1e-14));
}

TEST_CASE("chain marginals match Gibbs enumeration")
{
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto m = fixtures::random_model(2, 3, 2 + seed % 2, seed);
    const auto dec = split_grid(m);
    const auto lambda = fixtures::random_lambda(m, seed + 50);
    const double rho = 0.2 + 0.25 * seed;
    const auto nu = chain_marginals(m, dec, lambda, rho);
    for (int i = 0; i < 2; ++i) {
      const auto g = oracle::enum_gibbs_marginals(m, lambda, i, rho);
      for (index k = 0; k < g.unary.size(); ++k)
        CHECK(nu.unary[i][k] == Approx(g.unary[k]).epsilon(1e-10));
      for (index e : dec.edge_sets[i])
        for (index k = 0; k < m.labels() * m.labels(); ++k)
          CHECK(std::abs(nu.edge(i, e)[k] - g.pairwise[e * m.labels() * m.labels() + k]) < 1e-10);
      // Pairwise tables marginalize to the unaries.
      const index L = m.labels();
      for (index e : dec.edge_sets[i]) {
        const auto [u, v] = m.edge_nodes(e);
        for (index a = 0; a < L; ++a) {
          double row = 0.0, col = 0.0;
          for (index b = 0; b < L; ++b) {
            row += nu.edge(i, e)[a * L + b];
            col += nu.edge(i, e)[b * L + a];
          }
          CHECK(row == Approx(nu.node(i, u)[a]).epsilon(1e-12));
          CHECK(col == Approx(nu.node(i, v)[a]).epsilon(1e-12));
        }
      }
      for (index v = 0; v < m.node_count(); ++v) {
        double s = 0.0;
        for (double p : nu.node(i, v))
          s += p;
        CHECK(std::abs(s - 1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("gradient")
{
  const auto m = fixtures::t1();
  const auto dec = split_grid(m);
  const auto g = grad_smoothed_dual(m, dec, DualVector(m), 1.0);
  CHECK(g(0, 0) == Approx(t1_marginal_h_u0 - t1_marginal_v_u0).epsilon(1e-13));
  CHECK(g(0, 0) == Approx(0.0838396768382437).epsilon(1e-12));

  const GridModel zero(2, 2, 3);
  const auto g0 = grad_smoothed_dual(zero, split_grid(zero), DualVector(zero), 0.5);
  CHECK(fixtures::max_abs(g0.values()) < 1e-15);

  const auto r = fixtures::random_model(2, 3, 3, 21, 0.5);
  const auto rd = split_grid(r);
  const auto lambda = fixtures::random_lambda(r, 22, 0.5);
  const double rho = 0.4;
  const auto grad = grad_smoothed_dual(r, rd, lambda, rho);
  const std::vector<double> point(lambda.values().begin(), lambda.values().end());
  const auto fd = oracle::finite_diff(
      [&](const std::vector<double>& x) { return smoothed_dual(r, rd, DualVector(r.labels(), x), rho); },
      point, 1e-5);
  for (index k = 0; k < fd.size(); ++k)
    CHECK(std::abs(grad.values()[k] - fd[k]) < 1e-5);
}

TEST_CASE("derivative in rho")
{
  const auto m = fixtures::t1();
  const auto dec = split_grid(m);
  const DualVector zero(m);
  CHECK(d_smoothed_dual_d_rho(m, dec, zero, 1.0) == Approx(t1_d_rho).epsilon(1e-13));
  const auto fd = oracle::finite_diff(
      [&](const std::vector<double>& r) { return smoothed_dual(m, dec, zero, r[0]); }, {1.0}, 1e-5);
  CHECK(std::abs(fd[0] - t1_d_rho) < 1e-5);

  const GridModel single(1, 1, 2);
  CHECK(d_smoothed_dual_d_rho(single, split_grid(single), DualVector(single), 0.3)
        == Approx(-2 * std::log(2.0)).epsilon(1e-14));

  const GridModel pair(1, 2, 2);
  CHECK(d_smoothed_dual_d_rho(pair, split_grid(pair), DualVector(pair), 0.7)
        == Approx(-2 * std::log(4.0)).epsilon(1e-14));

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = fixtures::random_model(3, 3, 2, seed);
    const auto rd = split_grid(r);
    const auto lambda = fixtures::random_lambda(r, seed + 7);
    CHECK(d_smoothed_dual_d_rho(r, rd, lambda, 0.5) <= 0.0);
  }
}

TEST_CASE("evaluate_dual agrees with the individual functions")
{
  const auto m = fixtures::random_model(3, 4, 3, 31);
  const auto dec = split_grid(m);
  const auto lambda = fixtures::random_lambda(m, 32);
  const auto e = evaluate_dual(m, dec, lambda, 0.25);
  CHECK(e.dual == Approx(dual_value(m, dec, lambda)).epsilon(1e-14));
  CHECK(e.smoothed == Approx(smoothed_dual(m, dec, lambda, 0.25)).epsilon(1e-14));
  CHECK(e.d_smoothed_d_rho == Approx(d_smoothed_dual_d_rho(m, dec, lambda, 0.25)).epsilon(1e-12));
}

TEST_CASE("dual value is invariant to label-independent shifts of lambda")
{
  const auto m = fixtures::random_model(3, 3, 3, 41);
  const auto dec = split_grid(m);
  auto lambda = fixtures::random_lambda(m, 42);
  const double before = dual_value(m, dec, lambda);
  for (double& x : lambda.node(4))
    x += 0.75;
  CHECK(dual_value(m, dec, lambda) == Approx(before).epsilon(1e-13));
}
