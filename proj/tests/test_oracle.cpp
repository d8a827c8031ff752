#include <doctest.h>

#include <cmath>

#include "dsmooth/transport.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace dsmooth;

TEST_CASE("enumerated minimum")
{
  const auto [x, e] = oracle::enum_min_energy(fixtures::t1());
  CHECK(x == Labeling{{0, 0}});
  CHECK(e == 0.0);

  const auto [z, ez] = oracle::enum_min_energy(GridModel(2, 2, 3));
  CHECK(z == Labeling{{0, 0, 0, 0}});
  CHECK(ez == 0.0);

  GridModel single(1, 1, 2);
  single.unary(0)[0] = 3.5;
  single.unary(0)[1] = 1.25;
  const auto [s, es] = oracle::enum_min_energy(single);
  CHECK(s == Labeling{{1}});
  CHECK(es == 1.25);

  CHECK(oracle::labelspace_size(GridModel(2, 3, 4)) == 4096.0);
  CHECK_THROWS_AS(oracle::enum_min_energy(GridModel(4, 4, 4)), oracle::refused);
  CHECK_THROWS_AS(oracle::enum_min_energy(GridModel(2, 2, 3), {10}), oracle::refused);
}

TEST_CASE("labelings are visited in lexicographic order")
{
  std::vector<Labeling> seen;
  oracle::for_each_labeling(GridModel(1, 2, 3), {}, [&](const Labeling& x) { seen.push_back(x); });
  REQUIRE(seen.size() == 9);
  CHECK(seen[0] == Labeling{{0, 0}});
  CHECK(seen[1] == Labeling{{0, 1}});
  CHECK(seen[3] == Labeling{{1, 0}});
  CHECK(seen[8] == Labeling{{2, 2}});
}

TEST_CASE("soft-min and Gibbs marginals by enumeration")
{
  const auto m = fixtures::t1();
  const DualVector zero(m);
  CHECK(oracle::enum_softmin(m, zero, 0, 1.0) == doctest::Approx(-0.42661).epsilon(1e-4));
  const auto g = oracle::enum_gibbs_marginals(m, zero, 0, 1.0);
  CHECK(g.unary[0] == doctest::Approx(0.7063).epsilon(1e-4));
  CHECK(g.unary[1] == doctest::Approx(0.2937).epsilon(1e-4));

  // Single symmetric node: -rho ln L and uniform marginals.
  const GridModel node(1, 1, 3);
  for (double rho : {0.2, 1.0}) {
    CHECK(oracle::enum_softmin(node, DualVector(node), 0, rho)
          == doctest::Approx(-rho * std::log(3.0)).epsilon(1e-14));
    const auto u = oracle::enum_gibbs_marginals(node, DualVector(node), 1, rho);
    for (double p : u.unary)
      CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }

  // Pairwise marginals sum to the unary marginals of both endpoints.
  const auto r = fixtures::random_model(2, 3, 3, 4);
  const auto lambda = fixtures::random_lambda(r, 5);
  for (int i = 0; i < 2; ++i) {
    const auto gm = oracle::enum_gibbs_marginals(r, lambda, i, 0.4);
    for (index e = 0; e < r.edge_count(); ++e) {
      if (r.is_horizontal(e) != (i == 0))
        continue;
      const auto [u, v] = r.edge_nodes(e);
      for (index a = 0; a < 3; ++a) {
        double row = 0.0, col = 0.0;
        for (index b = 0; b < 3; ++b) {
          row += gm.pairwise[e * 9 + a * 3 + b];
          col += gm.pairwise[e * 9 + b * 3 + a];
        }
        CHECK(row == doctest::Approx(gm.unary[u * 3 + a]).epsilon(1e-12));
        CHECK(col == doctest::Approx(gm.unary[v * 3 + a]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("subgraph minimum lies below the soft-min's upper range")
{
  const auto r = fixtures::random_model(2, 2, 2, 8);
  const auto lambda = fixtures::random_lambda(r, 9);
  for (int i = 0; i < 2; ++i) {
    const double hard = oracle::enum_subgraph_min(r, lambda, i);
    const double soft = oracle::enum_softmin(r, lambda, i, 0.3);
    CHECK(soft <= hard);
    CHECK(hard <= soft + 0.3 * std::log(16.0) + 1e-12);
  }
}

TEST_CASE("finite differences")
{
  const auto linear = [](const std::vector<double>& x) { return 3.0 * x[0] - 2.0 * x[1]; };
  const auto d = oracle::finite_diff(linear, {0.4, -1.2}, 1e-5);
  CHECK(d[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(d[1] == doctest::Approx(-2.0).epsilon(1e-9));

  const auto square = [](const std::vector<double>& x) { return x[0] * x[0]; };
  CHECK(oracle::finite_diff(square, {0.0}, 1e-5)[0] == 0.0);
}

TEST_CASE("transport vertex enumeration")
{
  const auto forced = oracle::enum_transport_vertices({2, 2, {5, 7, 11, 13}, {1, 0}, {0, 1}});
  CHECK(forced.value == 7.0);
  CHECK(forced.plan == std::vector<double>{0, 1, 0, 0});

  const auto diag = oracle::enum_transport_vertices({2, 2, {0, 1, 1, 0}, {0.5, 0.5}, {0.5, 0.5}});
  CHECK(diag.value == 0.0);
  CHECK(diag.plan == std::vector<double>{0.5, 0, 0, 0.5});

  const auto constant = oracle::enum_transport_vertices(
      {3, 3, std::vector<double>(9, -1.5), {0.2, 0.3, 0.5}, {0.1, 0.1, 0.8}});
  CHECK(constant.value == doctest::Approx(-1.5).epsilon(1e-15));

  CHECK_THROWS_AS(oracle::enum_transport_vertices({4, 1, std::vector<double>(4, 0.0),
                                                   {0.25, 0.25, 0.25, 0.25}, {1.0}}),
                  oracle::refused);
}
