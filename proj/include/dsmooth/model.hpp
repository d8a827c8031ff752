#ifndef DSMOOTH_MODEL_HPP
#define DSMOOTH_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dsmooth {

using index = std::size_t;
using label = std::uint32_t;

struct ChainDecomposition;

// Pairwise MRF on an H x W 4-connected grid with a uniform label count L.
//
// Nodes are row-major: node(r, c) = r * width + c.
// Edges are numbered horizontal first, then vertical:
//   horizontal (r,c)-(r,c+1)  -> r * (width - 1) + c
//   vertical   (r,c)-(r+1,c)  -> H * (W - 1) + r * width + c
// Each edge table is L x L row-major with entry [a][b] = theta(first = a, second = b),
// where "first" is the left (horizontal) or top (vertical) endpoint.
class GridModel {
public:
  GridModel(index height, index width, index labels);

  index height() const { return height_; }
  index width() const { return width_; }
  index labels() const { return labels_; }
  index node_count() const { return height_ * width_; }
  index horizontal_edge_count() const { return height_ * (width_ - 1); }
  index vertical_edge_count() const { return (height_ - 1) * width_; }
  index edge_count() const { return horizontal_edge_count() + vertical_edge_count(); }

  index node(index r, index c) const { return r * width_ + c; }
  index horizontal_edge(index r, index c) const { return r * (width_ - 1) + c; }
  index vertical_edge(index r, index c) const { return horizontal_edge_count() + r * width_ + c; }
  bool is_horizontal(index edge) const { return edge < horizontal_edge_count(); }

  // (first, second) endpoints of an edge, in table orientation.
  std::pair<index, index> edge_nodes(index edge) const;

  std::span<double> unary(index node);
  std::span<const double> unary(index node) const;
  std::span<double> pairwise(index edge);
  std::span<const double> pairwise(index edge) const;

  std::span<double> unary_data() { return unary_; }
  std::span<const double> unary_data() const { return unary_; }
  std::span<double> pairwise_data() { return pairwise_; }
  std::span<const double> pairwise_data() const { return pairwise_; }

  // ln |X| = H * W * ln L.
  double log_labelspace() const { return log_labelspace_; }

  // Throws input_error if any potential is NaN or infinite.
  void validate() const;

  bool operator==(const GridModel&) const = default;

private:
  index height_;
  index width_;
  index labels_;
  double log_labelspace_;
  std::vector<double> unary_;
  std::vector<double> pairwise_;
};

struct Labeling {
  std::vector<label> labels;

  bool operator==(const Labeling&) const = default;
};

// Relaxed indicator vector mu: unary tables (node, label) and pairwise tables (edge, a, b).
class MarginalVector {
public:
  MarginalVector() = default;
  explicit MarginalVector(const GridModel& model);

  static MarginalVector indicator(const GridModel& model, const Labeling& x);

  index labels() const { return labels_; }
  index node_count() const { return labels_ ? unary_.size() / labels_ : 0; }
  index edge_count() const { return labels_ ? pairwise_.size() / (labels_ * labels_) : 0; }

  std::span<double> unary(index node) { return {unary_.data() + node * labels_, labels_}; }
  std::span<const double> unary(index node) const { return {unary_.data() + node * labels_, labels_}; }
  std::span<double> pairwise(index edge)
  {
    return {pairwise_.data() + edge * labels_ * labels_, labels_ * labels_};
  }
  std::span<const double> pairwise(index edge) const
  {
    return {pairwise_.data() + edge * labels_ * labels_, labels_ * labels_};
  }

  std::span<double> unary_data() { return unary_; }
  std::span<const double> unary_data() const { return unary_; }
  std::span<double> pairwise_data() { return pairwise_; }
  std::span<const double> pairwise_data() const { return pairwise_; }

private:
  index labels_ = 0;
  std::vector<double> unary_;
  std::vector<double> pairwise_;
};

double energy(const GridModel& model, const Labeling& x);

// <theta, mu>
double relaxed_energy(const GridModel& model, const MarginalVector& mu);

// Normalization, both marginalization families and nonnegativity, each within tol.
bool check_local_polytope(const GridModel& model, const MarginalVector& mu, double tol);

// Tree-reweighted free energy
//   <theta, mu> + rho * ( sum_v N_v sum mu_v ln mu_v
//                         + sum_uv N_uv sum mu_uv ln(mu_uv / (mu_u mu_v)) )
// with 0 ln 0 = 0. This orientation is convex in mu and is the Lagrange dual
// of the smoothed decomposition bound.
double trw_free_energy(const GridModel& model, const ChainDecomposition& dec,
                       const MarginalVector& mu, double rho);

// Potentials i.i.d. uniform on [0, 1) from std::mt19937_64(seed); each draw maps the
// top 53 bits of one engine output to (bits * 2^-53), so the stream is identical on
// every standard library.
GridModel generate_random_grid(index height, index width, index labels, std::uint64_t seed);

}

#endif
