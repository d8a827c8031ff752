#include "dsmooth/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "dsmooth/decomposition.hpp"
#include "dsmooth/errors.hpp"

namespace dsmooth {

namespace {

double x_log_x(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void require_labeling(const GridModel& model, const Labeling& x)
{
  if (x.labels.size() != model.node_count()) {
    std::ostringstream s;
    s << "labeling has " << x.labels.size() << " entries, model has " << model.node_count()
      << " nodes";
    throw input_error(s.str());
  }
  for (index v = 0; v < x.labels.size(); ++v) {
    if (x.labels[v] >= model.labels()) {
      std::ostringstream s;
      s << "label " << x.labels[v] << " at node " << v << " out of range [0, " << model.labels()
        << ")";
      throw input_error(s.str());
    }
  }
}

void require_marginals(const GridModel& model, const MarginalVector& mu)
{
  if (mu.labels() != model.labels() || mu.node_count() != model.node_count()
      || mu.edge_count() != model.edge_count())
    throw input_error("marginal vector dimensions do not match the model");
}

}

GridModel::GridModel(index height, index width, index labels)
: height_(height)
, width_(width)
, labels_(labels)
{
  if (height == 0 || width == 0 || labels == 0)
    throw input_error("grid dimensions and label count must be positive");
  log_labelspace_ = static_cast<double>(height * width) * std::log(static_cast<double>(labels));
  unary_.assign(node_count() * labels_, 0.0);
  pairwise_.assign(edge_count() * labels_ * labels_, 0.0);
}

std::pair<index, index> GridModel::edge_nodes(index edge) const
{
  if (is_horizontal(edge)) {
    const index r = edge / (width_ - 1);
    const index c = edge % (width_ - 1);
    return {node(r, c), node(r, c + 1)};
  }
  const index k = edge - horizontal_edge_count();
  const index r = k / width_;
  const index c = k % width_;
  return {node(r, c), node(r + 1, c)};
}

std::span<double> GridModel::unary(index v) { return {unary_.data() + v * labels_, labels_}; }

std::span<const double> GridModel::unary(index v) const
{
  return {unary_.data() + v * labels_, labels_};
}

std::span<double> GridModel::pairwise(index e)
{
  return {pairwise_.data() + e * labels_ * labels_, labels_ * labels_};
}

std::span<const double> GridModel::pairwise(index e) const
{
  return {pairwise_.data() + e * labels_ * labels_, labels_ * labels_};
}

void GridModel::validate() const
{
  for (index i = 0; i < unary_.size(); ++i) {
    if (!std::isfinite(unary_[i])) {
      std::ostringstream s;
      s << "non-finite unary potential at node " << i / labels_ << ", label " << i % labels_;
      throw input_error(s.str());
    }
  }
  const index table = labels_ * labels_;
  for (index i = 0; i < pairwise_.size(); ++i) {
    if (!std::isfinite(pairwise_[i])) {
      std::ostringstream s;
      s << "non-finite pairwise potential at edge " << i / table << ", entry " << i % table;
      throw input_error(s.str());
    }
  }
}

MarginalVector::MarginalVector(const GridModel& model)
: labels_(model.labels())
, unary_(model.node_count() * model.labels(), 0.0)
, pairwise_(model.edge_count() * model.labels() * model.labels(), 0.0)
{
}

MarginalVector MarginalVector::indicator(const GridModel& model, const Labeling& x)
{
  require_labeling(model, x);
  MarginalVector mu(model);
  const index L = model.labels();
  for (index v = 0; v < model.node_count(); ++v)
    mu.unary(v)[x.labels[v]] = 1.0;
  for (index e = 0; e < model.edge_count(); ++e) {
    const auto [a, b] = model.edge_nodes(e);
    mu.pairwise(e)[x.labels[a] * L + x.labels[b]] = 1.0;
  }
  return mu;
}

double energy(const GridModel& model, const Labeling& x)
{
  require_labeling(model, x);
  const index L = model.labels();
  double result = 0.0;
  for (index v = 0; v < model.node_count(); ++v)
    result += model.unary(v)[x.labels[v]];
  for (index e = 0; e < model.edge_count(); ++e) {
    const auto [a, b] = model.edge_nodes(e);
    result += model.pairwise(e)[x.labels[a] * L + x.labels[b]];
  }
  return result;
}

double relaxed_energy(const GridModel& model, const MarginalVector& mu)
{
  require_marginals(model, mu);
  double result = 0.0;
  const auto theta_u = model.unary_data();
  const auto mu_u = mu.unary_data();
  for (index i = 0; i < theta_u.size(); ++i)
    result += theta_u[i] * mu_u[i];
  const auto theta_p = model.pairwise_data();
  const auto mu_p = mu.pairwise_data();
  for (index i = 0; i < theta_p.size(); ++i)
    result += theta_p[i] * mu_p[i];
  return result;
}

bool check_local_polytope(const GridModel& model, const MarginalVector& mu, double tol)
{
  require_marginals(model, mu);
  if (!(tol > 0.0))
    throw input_error("feasibility tolerance must be positive");
  const index L = model.labels();

  for (double m : mu.unary_data())
    if (!(m >= -tol))
      return false;
  for (double m : mu.pairwise_data())
    if (!(m >= -tol))
      return false;

  for (index v = 0; v < model.node_count(); ++v) {
    double s = 0.0;
    for (double m : mu.unary(v))
      s += m;
    if (std::abs(s - 1.0) > tol)
      return false;
  }

  for (index e = 0; e < model.edge_count(); ++e) {
    const auto [u, v] = model.edge_nodes(e);
    const auto p = mu.pairwise(e);
    for (index a = 0; a < L; ++a) {
      double s = 0.0;
      for (index b = 0; b < L; ++b)
        s += p[a * L + b];
      if (std::abs(s - mu.unary(u)[a]) > tol)
        return false;
    }
    for (index b = 0; b < L; ++b) {
      double s = 0.0;
      for (index a = 0; a < L; ++a)
        s += p[a * L + b];
      if (std::abs(s - mu.unary(v)[b]) > tol)
        return false;
    }
  }
  return true;
}

double trw_free_energy(const GridModel& model, const ChainDecomposition& dec,
                       const MarginalVector& mu, double rho)
{
  require_marginals(model, mu);
  const index L = model.labels();
  double entropy_block = 0.0;

  for (index v = 0; v < model.node_count(); ++v) {
    double s = 0.0;
    for (double m : mu.unary(v))
      s += x_log_x(m);
    entropy_block += dec.node_multiplicity[v] * s;
  }

  for (index e = 0; e < model.edge_count(); ++e) {
    const auto [u, v] = model.edge_nodes(e);
    const auto p = mu.pairwise(e);
    double s = 0.0;
    for (index a = 0; a < L; ++a) {
      for (index b = 0; b < L; ++b) {
        const double m = p[a * L + b];
        if (m <= 0.0)
          continue;
        const double mu_a = mu.unary(u)[a];
        const double mu_b = mu.unary(v)[b];
        if (mu_a <= 0.0 || mu_b <= 0.0)
          continue;
        s += m * (std::log(m) - std::log(mu_a) - std::log(mu_b));
      }
    }
    entropy_block += dec.edge_multiplicity[e] * s;
  }

  return relaxed_energy(model, mu) + rho * entropy_block;
}

GridModel generate_random_grid(index height, index width, index labels, std::uint64_t seed)
{
  GridModel model(height, width, labels);
  std::mt19937_64 engine(seed);
  const auto draw = [&engine] {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
  };
  for (double& x : model.unary_data())
    x = draw();
  for (double& x : model.pairwise_data())
    x = draw();
  return model;
}

}
