#include "dsmooth/primal.hpp"

#include <limits>

#include "dsmooth/errors.hpp"
#include "dsmooth/transport.hpp"

namespace dsmooth {

namespace {

MarginalVector with_unaries(const GridModel& model, const ChainMarginals& nu)
{
  MarginalVector mu(model);
  const auto unary = recover_unary(nu);
  std::copy(unary.begin(), unary.end(), mu.unary_data().begin());
  return mu;
}

TransportProblem edge_problem(const GridModel& model, const MarginalVector& mu, index e)
{
  const index L = model.labels();
  const auto [u, v] = model.edge_nodes(e);
  TransportProblem p;
  p.rows = L;
  p.cols = L;
  const auto psi = model.pairwise(e);
  p.cost.assign(psi.begin(), psi.end());
  p.row_marginals.assign(mu.unary(u).begin(), mu.unary(u).end());
  p.col_marginals.assign(mu.unary(v).begin(), mu.unary(v).end());
  return p;
}

}

std::vector<double> recover_unary(const ChainMarginals& nu)
{
  std::vector<double> out(nu.unary[0].size());
  for (index k = 0; k < out.size(); ++k)
    out[k] = (nu.unary[0][k] + nu.unary[1][k]) / 2;
  // Renormalize so that both endpoints of an edge carry the same mass to rounding.
  const index L = nu.labels;
  for (index v = 0; L > 0 && v < out.size() / L; ++v) {
    double sum = 0.0;
    for (index a = 0; a < L; ++a)
      sum += out[v * L + a];
    for (index a = 0; a < L; ++a)
      out[v * L + a] /= sum;
  }
  return out;
}

std::pair<MarginalVector, double> primal_lp_bound(const GridModel& model,
                                                  const ChainMarginals& nu)
{
  MarginalVector mu = with_unaries(model, nu);
  for (index e = 0; e < model.edge_count(); ++e) {
    const auto plan = solve_transport(edge_problem(model, mu, e));
    std::copy(plan.mass.begin(), plan.mass.end(), mu.pairwise(e).begin());
  }
  const double value = relaxed_energy(model, mu);
  return {std::move(mu), value};
}

std::pair<MarginalVector, double> primal_lp_bound(const GridModel& model,
                                                  const ChainDecomposition& dec,
                                                  const DualVector& lambda, double rho)
{
  return primal_lp_bound(model, chain_marginals(model, dec, lambda, rho));
}

std::pair<MarginalVector, double> primal_trw_bound(const GridModel& model,
                                                   const ChainDecomposition& dec,
                                                   const ChainMarginals& nu, double rho)
{
  MarginalVector mu = with_unaries(model, nu);
  for (index e = 0; e < model.edge_count(); ++e) {
    const auto plan =
        solve_entropic_transport(edge_problem(model, mu, e), rho, dec.edge_multiplicity[e]);
    std::copy(plan.mass.begin(), plan.mass.end(), mu.pairwise(e).begin());
  }
  const double value = trw_free_energy(model, dec, mu, rho);
  return {std::move(mu), value};
}

std::pair<MarginalVector, double> primal_trw_bound(const GridModel& model,
                                                   const ChainDecomposition& dec,
                                                   const DualVector& lambda, double rho)
{
  return primal_trw_bound(model, dec, chain_marginals(model, dec, lambda, rho), rho);
}

Labeling greedy_labeling(const GridModel& model)
{
  const index L = model.labels();
  const index W = model.width();
  Labeling x;
  x.labels.assign(model.node_count(), 0);
  for (index r = 0; r < model.height(); ++r) {
    for (index c = 0; c < W; ++c) {
      const index v = model.node(r, c);
      double best = std::numeric_limits<double>::infinity();
      label arg = 0;
      for (index a = 0; a < L; ++a) {
        double cost = model.unary(v)[a];
        if (c > 0)
          cost += model.pairwise(model.horizontal_edge(r, c - 1))[x.labels[v - 1] * L + a];
        if (r > 0)
          cost += model.pairwise(model.vertical_edge(r - 1, c))[x.labels[v - W] * L + a];
        if (cost < best) {
          best = cost;
          arg = static_cast<label>(a);
        }
      }
      x.labels[v] = arg;
    }
  }
  return x;
}

RoundingResult round_integer(const GridModel& model, const MarginalVector& mu)
{
  if (mu.labels() != model.labels() || mu.node_count() != model.node_count())
    throw input_error("marginal vector dimensions do not match the model");
  const index L = model.labels();

  RoundingResult argmax;
  argmax.scheme = RoundingScheme::argmax;
  argmax.labeling.labels.resize(model.node_count());
  for (index v = 0; v < model.node_count(); ++v) {
    const auto m = mu.unary(v);
    label arg = 0;
    for (index a = 1; a < L; ++a)
      if (m[a] > m[arg])
        arg = static_cast<label>(a);
    argmax.labeling.labels[v] = arg;
  }
  argmax.energy = energy(model, argmax.labeling);

  RoundingResult greedy;
  greedy.scheme = RoundingScheme::greedy;
  greedy.labeling = greedy_labeling(model);
  greedy.energy = energy(model, greedy.labeling);

  return greedy.energy < argmax.energy ? greedy : argmax;
}

}
