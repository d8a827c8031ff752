#include "dsmooth/strws.hpp"

#include <cmath>

#include "dsmooth/errors.hpp"
#include "dsmooth/log_sum_exp.hpp"

namespace dsmooth {

namespace {

double subgraph_unary(const GridModel& model, const DualVector& lambda, int i, index v, index a)
{
  const double half = model.unary(v)[a] / 2;
  return i == 0 ? half + lambda(v, a) : half - lambda(v, a);
}

// Message from `from` across edge e into its chain neighbour. `from_is_first` tells
// whether `from` indexes the rows of the edge table.
void propagate(const GridModel& model, const DualVector& lambda, double rho, int i, index from,
               index e, bool from_is_first, std::span<const double> incoming,
               std::span<double> outgoing, std::vector<double>& terms)
{
  const index L = model.labels();
  const auto psi = model.pairwise(e);
  for (index y = 0; y < L; ++y) {
    for (index x = 0; x < L; ++x) {
      const double table = from_is_first ? psi[x * L + y] : psi[y * L + x];
      terms[x] = incoming[x] - subgraph_unary(model, lambda, i, from, x) / rho - table / rho;
    }
    outgoing[y] = log_sum_exp(terms);
  }
  normalize_max(outgoing);
}

}

SweepState::SweepState(const GridModel& model, DualVector lambda, double rho)
: lambda_(std::move(lambda))
, rho_(rho)
{
  if (lambda_.labels() != model.labels() || lambda_.node_count() != model.node_count())
    throw input_error("dual vector dimensions do not match the model");
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw input_error("smoothing parameter rho must be positive and finite");
  for (auto& per_direction : cache_)
    for (auto& per_subgraph : per_direction)
      per_subgraph.assign(model.node_count() * model.labels(), 0.0);
}

void SweepState::set_rho(double rho)
{
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw input_error("smoothing parameter rho must be positive and finite");
  if (rho == rho_)
    return;
  rho_ = rho;
  valid_ = {false, false};
}

void init_messages(SweepState& state, const GridModel& model, const ChainDecomposition& dec,
                   Direction d)
{
  const index L = model.labels();
  const int slot = SweepState::index_of(d);
  std::vector<double> terms(L);
  for (int i = 0; i < 2; ++i) {
    auto& cache = state.cache_[slot][i];
    for (const Chain& chain : dec.chains[i]) {
      const index n = chain.nodes.size();
      if (d == Direction::forward) {
        std::fill_n(cache.begin() + chain.nodes[0] * L, L, 0.0);
        for (index k = 0; k + 1 < n; ++k) {
          const index v = chain.nodes[k];
          const index w = chain.nodes[k + 1];
          propagate(model, state.lambda_, state.rho_, i, v, chain.edges[k], true,
                    {cache.data() + v * L, L}, {cache.data() + w * L, L}, terms);
        }
      } else {
        std::fill_n(cache.begin() + chain.nodes[n - 1] * L, L, 0.0);
        for (index k = n - 1; k > 0; --k) {
          const index v = chain.nodes[k];
          const index u = chain.nodes[k - 1];
          propagate(model, state.lambda_, state.rho_, i, v, chain.edges[k - 1], false,
                    {cache.data() + v * L, L}, {cache.data() + u * L, L}, terms);
        }
      }
    }
  }
  state.valid_[slot] = true;
  ++state.rebuilds_;
}

void sweep(SweepState& state, const GridModel& model, const ChainDecomposition& dec, Direction d)
{
  const int same = SweepState::index_of(d);
  const int other = SweepState::index_of(opposite(d));
  if (!state.valid_[other])
    throw contract_error("sweep requires valid opposite-direction message caches; "
                         "call init_messages after changing rho");

  const index L = model.labels();
  const index N = model.node_count();
  const double rho = state.rho_;
  DualVector& lambda = state.lambda_;
  std::vector<double> terms(L);
  std::array<std::vector<double>, 2> log_nu = {std::vector<double>(L), std::vector<double>(L)};

  for (index step = 0; step < N; ++step) {
    const index v = d == Direction::forward ? step : N - 1 - step;

    for (int i = 0; i < 2; ++i) {
      const auto fwd = std::span<const double>(state.cache_[0][i]).subspan(v * L, L);
      const auto bwd = std::span<const double>(state.cache_[1][i]).subspan(v * L, L);
      for (index a = 0; a < L; ++a)
        log_nu[i][a] = fwd[a] + bwd[a] - subgraph_unary(model, lambda, i, v, a) / rho;
      const double z = log_sum_exp(log_nu[i]);
      for (index a = 0; a < L; ++a)
        log_nu[i][a] -= z;
    }
    for (index a = 0; a < L; ++a)
      lambda(v, a) += rho / 2 * (log_nu[0][a] - log_nu[1][a]);

    for (int i = 0; i < 2; ++i) {
      const Chain& chain = dec.chains[i][dec.chain_of[i][v]];
      const index p = dec.position_of[i][v];
      auto& cache = state.cache_[same][i];
      if (d == Direction::forward && p + 1 < chain.nodes.size()) {
        const index w = chain.nodes[p + 1];
        propagate(model, lambda, rho, i, v, chain.edges[p], true, {cache.data() + v * L, L},
                  {cache.data() + w * L, L}, terms);
      } else if (d == Direction::backward && p > 0) {
        const index u = chain.nodes[p - 1];
        propagate(model, lambda, rho, i, v, chain.edges[p - 1], false, {cache.data() + v * L, L},
                  {cache.data() + u * L, L}, terms);
      }
    }
  }

  state.valid_[same] = true;
  state.valid_[other] = false;
  state.next_ = opposite(d);
  ++state.sweeps_;
}

void run_cycles(SweepState& state, const GridModel& model, const ChainDecomposition& dec, int n)
{
  if (n < 1)
    throw input_error("run_cycles needs at least one sweep");
  for (int k = 0; k < n; ++k) {
    const Direction d = state.next_direction();
    if (!state.cache_valid(opposite(d)))
      init_messages(state, model, dec, opposite(d));
    sweep(state, model, dec, d);
  }
}

}
