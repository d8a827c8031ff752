#ifndef DSMOOTH_DECOMPOSITION_HPP
#define DSMOOTH_DECOMPOSITION_HPP

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "dsmooth/model.hpp"

namespace dsmooth {

// One connected component of an acyclic subgraph: a path.
// edges[k] joins nodes[k] (table row) and nodes[k + 1] (table column).
struct Chain {
  std::vector<index> nodes;
  std::vector<index> edges;
};

// Split of the grid into two edge-disjoint spanning forests of paths.
// Subgraph 0 holds the horizontal edges (rows), subgraph 1 the vertical edges (columns).
struct ChainDecomposition {
  std::array<std::vector<index>, 2> edge_sets;
  std::array<std::vector<Chain>, 2> chains;
  std::vector<int> node_multiplicity;  // N_v
  std::vector<int> edge_multiplicity;  // N_uv

  // For each subgraph and node: which chain holds it and at which position.
  std::array<std::vector<index>, 2> chain_of;
  std::array<std::vector<index>, 2> position_of;
};

ChainDecomposition split_grid(const GridModel& model);

// Dual variables lambda, one per (node, label).
class DualVector {
public:
  DualVector() = default;
  explicit DualVector(const GridModel& model)
  : labels_(model.labels())
  , values_(model.node_count() * model.labels(), 0.0)
  {
  }
  DualVector(index labels, std::vector<double> values)
  : labels_(labels)
  , values_(std::move(values))
  {
  }

  index labels() const { return labels_; }
  index node_count() const { return labels_ ? values_.size() / labels_ : 0; }
  double& operator()(index node, index l) { return values_[node * labels_ + l]; }
  double operator()(index node, index l) const { return values_[node * labels_ + l]; }
  std::span<double> node(index v) { return {values_.data() + v * labels_, labels_}; }
  std::span<const double> node(index v) const { return {values_.data() + v * labels_, labels_}; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool operator==(const DualVector&) const = default;

private:
  index labels_ = 0;
  std::vector<double> values_;
};

// Gibbs marginals of both subgraph distributions. pairwise[i] is sized for all edges;
// only edges of subgraph i carry values.
struct ChainMarginals {
  index labels = 0;
  std::array<std::vector<double>, 2> unary;
  std::array<std::vector<double>, 2> pairwise;

  std::span<const double> node(int i, index v) const
  {
    return {unary[i].data() + v * labels, labels};
  }
  std::span<const double> edge(int i, index e) const
  {
    return {pairwise[i].data() + e * labels * labels, labels * labels};
  }
};

// Unary potentials of subgraph i (0 or 1): theta_v / 2 + lambda_v for i = 0 and
// theta_v / 2 - lambda_v for i = 1. Pairwise potentials are the model's on that subgraph.
std::vector<double> reparametrize(const GridModel& model, const DualVector& lambda, int i);

// Min-plus DP over the chains of subgraph i with the given unary potentials.
double chain_min_energy(const GridModel& model, const ChainDecomposition& dec,
                        std::span<const double> subgraph_unary, int i);

// U(lambda)
double dual_value(const GridModel& model, const ChainDecomposition& dec, const DualVector& lambda);

// -rho * ln sum_x exp(-E(theta^i, x) / rho) over both subgraphs, via log-domain sum-product.
double smoothed_dual(const GridModel& model, const ChainDecomposition& dec,
                     const DualVector& lambda, double rho);

ChainMarginals chain_marginals(const GridModel& model, const ChainDecomposition& dec,
                               const DualVector& lambda, double rho);

// Gradient in lambda: nu^1 - nu^2 on unary coordinates.
DualVector grad_smoothed_dual(const GridModel& model, const ChainDecomposition& dec,
                              const DualVector& lambda, double rho);

// d/d rho of the smoothed dual: U_rho / rho - (1/rho) sum_i <theta^i, nu^i>.
double d_smoothed_dual_d_rho(const GridModel& model, const ChainDecomposition& dec,
                             const DualVector& lambda, double rho);

// Everything a solver iteration needs from one min-plus plus one forward-backward
// pass per chain.
struct DualEvaluation {
  double dual = 0.0;           // U(lambda)
  double smoothed = 0.0;       // U_rho(lambda)
  double d_smoothed_d_rho = 0.0;
  ChainMarginals marginals;
};

DualEvaluation evaluate_dual(const GridModel& model, const ChainDecomposition& dec,
                             const DualVector& lambda, double rho);

}

#endif
