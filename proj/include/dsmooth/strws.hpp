#ifndef DSMOOTH_STRWS_HPP
#define DSMOOTH_STRWS_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dsmooth/decomposition.hpp"
#include "dsmooth/model.hpp"

namespace dsmooth {

enum class Direction { forward, backward };

inline Direction opposite(Direction d)
{
  return d == Direction::forward ? Direction::backward : Direction::forward;
}

// Smoothed TRW-S state: dual point, smoothing, and the log-domain message caches of
// both subgraphs.
//
// forward_[i][v] is the log message flowing into v from its predecessors in chain i
// (v's own unary excluded); backward_[i][v] the message from its successors. A cache
// is valid when it matches the current (lambda, rho). A forward sweep needs valid
// backward caches and leaves valid forward caches behind, and vice versa.
class SweepState {
public:
  SweepState(const GridModel& model, DualVector lambda, double rho);

  const DualVector& lambda() const { return lambda_; }
  double rho() const { return rho_; }

  // Changing rho invalidates both caches.
  void set_rho(double rho);

  bool cache_valid(Direction d) const { return valid_[index_of(d)]; }
  Direction next_direction() const { return next_; }

  std::int64_t oracle_calls() const { return sweeps_ + rebuilds_; }
  std::int64_t sweeps() const { return sweeps_; }
  std::int64_t rebuilds() const { return rebuilds_; }

  std::span<const double> messages(Direction d, int i) const { return cache_[index_of(d)][i]; }

private:
  static int index_of(Direction d) { return d == Direction::forward ? 0 : 1; }

  friend void init_messages(SweepState&, const GridModel&, const ChainDecomposition&, Direction);
  friend void sweep(SweepState&, const GridModel&, const ChainDecomposition&, Direction);

  DualVector lambda_;
  double rho_;
  // cache_[direction][subgraph], node_count * L log-values each.
  std::array<std::array<std::vector<double>, 2>, 2> cache_;
  std::array<bool, 2> valid_ = {false, false};
  Direction next_ = Direction::forward;
  std::int64_t sweeps_ = 0;
  std::int64_t rebuilds_ = 0;
};

// Rebuilds the caches of direction d from scratch for the current (lambda, rho).
// Counts one oracle call.
void init_messages(SweepState& state, const GridModel& model, const ChainDecomposition& dec,
                   Direction d);

// One pass over all nodes in raster order (forward) or reverse raster order (backward).
// At each node the lambda block is set to the exact maximizer of the smoothed dual
// over that node's labels:
//   lambda_v += rho / 2 * (ln nu^1_v - ln nu^2_v),
// which equalizes the two subgraph marginals at v. Counts one oracle call.
// Throws contract_error if the opposite direction's caches are stale.
void sweep(SweepState& state, const GridModel& model, const ChainDecomposition& dec, Direction d);

// n alternating directional sweeps at constant rho, preceded by a cache rebuild when
// the caches needed by the first sweep are stale. Costs n + 1 oracle calls after a rho
// change and n otherwise.
void run_cycles(SweepState& state, const GridModel& model, const ChainDecomposition& dec, int n);

}

#endif
