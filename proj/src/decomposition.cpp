#include "dsmooth/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsmooth/errors.hpp"
#include "dsmooth/log_sum_exp.hpp"

namespace dsmooth {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void require_rho(double rho)
{
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw input_error("smoothing parameter rho must be positive and finite");
}

void require_dual(const GridModel& model, const DualVector& lambda)
{
  if (lambda.labels() != model.labels() || lambda.node_count() != model.node_count())
    throw input_error("dual vector dimensions do not match the model");
}

double chain_min(const GridModel& model, const Chain& chain, std::span<const double> unary)
{
  const index L = model.labels();
  std::vector<double> m(unary.begin() + chain.nodes[0] * L, unary.begin() + (chain.nodes[0] + 1) * L);
  std::vector<double> next(L);
  for (index k = 0; k < chain.edges.size(); ++k) {
    const auto psi = model.pairwise(chain.edges[k]);
    const index w = chain.nodes[k + 1];
    for (index b = 0; b < L; ++b) {
      double best = inf;
      for (index a = 0; a < L; ++a)
        best = std::min(best, m[a] + psi[a * L + b]);
      next[b] = best + unary[w * L + b];
    }
    m.swap(next);
  }
  return *std::min_element(m.begin(), m.end());
}

struct ChainSums {
  double log_partition = 0.0;
  double expected_energy = 0.0;
};

// Log-domain forward-backward on one chain. Writes unary marginals for every node
// of the chain and pairwise marginals for every chain edge into the given buffers.
ChainSums chain_sum_product(const GridModel& model, const Chain& chain,
                            std::span<const double> unary, double rho,
                            std::span<double> unary_out, std::span<double> pairwise_out)
{
  const index L = model.labels();
  const index n = chain.nodes.size();
  const auto phi = [&](index k, index a) { return unary[chain.nodes[k] * L + a]; };

  // alpha[k] includes node k's own unary; beta[k] excludes it.
  std::vector<double> alpha(n * L);
  std::vector<double> beta(n * L, 0.0);
  std::vector<double> terms(L);

  for (index a = 0; a < L; ++a)
    alpha[a] = -phi(0, a) / rho;
  for (index k = 0; k + 1 < n; ++k) {
    const auto psi = model.pairwise(chain.edges[k]);
    for (index b = 0; b < L; ++b) {
      for (index a = 0; a < L; ++a)
        terms[a] = alpha[k * L + a] - psi[a * L + b] / rho;
      alpha[(k + 1) * L + b] = log_sum_exp(terms) - phi(k + 1, b) / rho;
    }
  }
  for (index k = n - 1; k-- > 0;) {
    const auto psi = model.pairwise(chain.edges[k]);
    for (index a = 0; a < L; ++a) {
      for (index b = 0; b < L; ++b)
        terms[b] = beta[(k + 1) * L + b] - phi(k + 1, b) / rho - psi[a * L + b] / rho;
      beta[k * L + a] = log_sum_exp(terms);
    }
  }

  ChainSums sums;
  sums.log_partition = log_sum_exp(std::span<const double>(alpha).subspan((n - 1) * L, L));

  std::vector<double> belief(L);
  for (index k = 0; k < n; ++k) {
    for (index a = 0; a < L; ++a)
      belief[a] = alpha[k * L + a] + beta[k * L + a];
    const double z = log_sum_exp(belief);
    const index v = chain.nodes[k];
    for (index a = 0; a < L; ++a) {
      const double p = std::exp(belief[a] - z);
      unary_out[v * L + a] = p;
      sums.expected_energy += p * phi(k, a);
    }
  }

  std::vector<double> joint(L * L);
  for (index k = 0; k + 1 < n; ++k) {
    const index e = chain.edges[k];
    const auto psi = model.pairwise(e);
    for (index a = 0; a < L; ++a)
      for (index b = 0; b < L; ++b)
        joint[a * L + b] = alpha[k * L + a] - psi[a * L + b] / rho - phi(k + 1, b) / rho
                           + beta[(k + 1) * L + b];
    const double z = log_sum_exp(joint);
    for (index ab = 0; ab < L * L; ++ab) {
      const double p = std::exp(joint[ab] - z);
      pairwise_out[e * L * L + ab] = p;
      sums.expected_energy += p * psi[ab];
    }
  }
  return sums;
}

}

ChainDecomposition split_grid(const GridModel& model)
{
  const index H = model.height();
  const index W = model.width();
  ChainDecomposition dec;
  dec.node_multiplicity.assign(model.node_count(), 2);
  dec.edge_multiplicity.assign(model.edge_count(), 1);
  for (int i = 0; i < 2; ++i) {
    dec.chain_of[i].assign(model.node_count(), 0);
    dec.position_of[i].assign(model.node_count(), 0);
  }

  for (index r = 0; r < H; ++r) {
    Chain chain;
    for (index c = 0; c < W; ++c) {
      const index v = model.node(r, c);
      dec.chain_of[0][v] = r;
      dec.position_of[0][v] = c;
      chain.nodes.push_back(v);
      if (c + 1 < W) {
        chain.edges.push_back(model.horizontal_edge(r, c));
        dec.edge_sets[0].push_back(model.horizontal_edge(r, c));
      }
    }
    dec.chains[0].push_back(std::move(chain));
  }

  for (index c = 0; c < W; ++c) {
    Chain chain;
    for (index r = 0; r < H; ++r) {
      const index v = model.node(r, c);
      dec.chain_of[1][v] = c;
      dec.position_of[1][v] = r;
      chain.nodes.push_back(v);
      if (r + 1 < H) {
        chain.edges.push_back(model.vertical_edge(r, c));
        dec.edge_sets[1].push_back(model.vertical_edge(r, c));
      }
    }
    dec.chains[1].push_back(std::move(chain));
  }
  std::sort(dec.edge_sets[1].begin(), dec.edge_sets[1].end());
  return dec;
}

std::vector<double> reparametrize(const GridModel& model, const DualVector& lambda, int i)
{
  require_dual(model, lambda);
  const auto theta = model.unary_data();
  const auto l = lambda.values();
  std::vector<double> out(theta.size());
  const double sign = i == 0 ? 1.0 : -1.0;
  for (index k = 0; k < theta.size(); ++k)
    out[k] = theta[k] / 2 + sign * l[k];
  return out;
}

double chain_min_energy(const GridModel& model, const ChainDecomposition& dec,
                        std::span<const double> subgraph_unary, int i)
{
  double total = 0.0;
  for (const Chain& chain : dec.chains[i])
    total += chain_min(model, chain, subgraph_unary);
  return total;
}

double dual_value(const GridModel& model, const ChainDecomposition& dec, const DualVector& lambda)
{
  double total = 0.0;
  for (int i = 0; i < 2; ++i)
    total += chain_min_energy(model, dec, reparametrize(model, lambda, i), i);
  return total;
}

DualEvaluation evaluate_dual(const GridModel& model, const ChainDecomposition& dec,
                             const DualVector& lambda, double rho)
{
  require_rho(rho);
  require_dual(model, lambda);
  const index L = model.labels();

  DualEvaluation result;
  result.marginals.labels = L;
  double expected = 0.0;
  for (int i = 0; i < 2; ++i) {
    const auto unary = reparametrize(model, lambda, i);
    result.marginals.unary[i].assign(model.node_count() * L, 0.0);
    result.marginals.pairwise[i].assign(model.edge_count() * L * L, 0.0);
    for (const Chain& chain : dec.chains[i]) {
      result.dual += chain_min(model, chain, unary);
      const auto sums = chain_sum_product(model, chain, unary, rho, result.marginals.unary[i],
                                          result.marginals.pairwise[i]);
      result.smoothed += -rho * sums.log_partition;
      expected += sums.expected_energy;
    }
  }
  result.d_smoothed_d_rho = (result.smoothed - expected) / rho;
  return result;
}

double smoothed_dual(const GridModel& model, const ChainDecomposition& dec,
                     const DualVector& lambda, double rho)
{
  return evaluate_dual(model, dec, lambda, rho).smoothed;
}

ChainMarginals chain_marginals(const GridModel& model, const ChainDecomposition& dec,
                               const DualVector& lambda, double rho)
{
  return evaluate_dual(model, dec, lambda, rho).marginals;
}

DualVector grad_smoothed_dual(const GridModel& model, const ChainDecomposition& dec,
                              const DualVector& lambda, double rho)
{
  const auto nu = chain_marginals(model, dec, lambda, rho);
  std::vector<double> g(nu.unary[0].size());
  for (index k = 0; k < g.size(); ++k)
    g[k] = nu.unary[0][k] - nu.unary[1][k];
  return DualVector(model.labels(), std::move(g));
}

double d_smoothed_dual_d_rho(const GridModel& model, const ChainDecomposition& dec,
                             const DualVector& lambda, double rho)
{
  return evaluate_dual(model, dec, lambda, rho).d_smoothed_d_rho;
}

}
