#ifndef DSMOOTH_PRIMAL_HPP
#define DSMOOTH_PRIMAL_HPP

#include <utility>
#include <vector>

#include "dsmooth/decomposition.hpp"
#include "dsmooth/model.hpp"

namespace dsmooth {

enum class RoundingScheme { argmax, greedy };

struct RoundingResult {
  Labeling labeling;
  double energy = 0.0;
  RoundingScheme scheme = RoundingScheme::argmax;
};

struct PrimalBounds {
  MarginalVector mu_lp;
  double e_lp = 0.0;
  MarginalVector mu_trw;
  double e_trw = 0.0;
  Labeling x_int;
  double e_int = 0.0;
};

// Average of the two subgraph unary marginals, node by node.
std::vector<double> recover_unary(const ChainMarginals& nu);

// Feasible point with the recovered unaries and, per edge, the cheapest pairwise table
// consistent with them (a small transportation LP). Returns (mu, <theta, mu>).
std::pair<MarginalVector, double> primal_lp_bound(const GridModel& model,
                                                  const ChainDecomposition& dec,
                                                  const DualVector& lambda, double rho);
std::pair<MarginalVector, double> primal_lp_bound(const GridModel& model,
                                                  const ChainMarginals& nu);

// Same unaries; pairwise tables from the KL-regularized transport. Returns
// (mu, tree-reweighted free energy of mu).
std::pair<MarginalVector, double> primal_trw_bound(const GridModel& model,
                                                   const ChainDecomposition& dec,
                                                   const DualVector& lambda, double rho);
std::pair<MarginalVector, double> primal_trw_bound(const GridModel& model,
                                                   const ChainDecomposition& dec,
                                                   const ChainMarginals& nu, double rho);

// Better of node-wise argmax of mu's unaries and a greedy raster sweep that fixes each
// node to minimize its unary plus the pairwise terms to already fixed neighbours.
// Ties go to the smaller label; on equal energies the argmax labeling is returned.
RoundingResult round_integer(const GridModel& model, const MarginalVector& mu);

// The greedy raster labeling alone; needs no marginals.
Labeling greedy_labeling(const GridModel& model);

}

#endif
