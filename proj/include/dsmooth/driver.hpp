#ifndef DSMOOTH_DRIVER_HPP
#define DSMOOTH_DRIVER_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dsmooth/decomposition.hpp"
#include "dsmooth/errors.hpp"
#include "dsmooth/model.hpp"
#include "dsmooth/primal.hpp"
#include "dsmooth/schedule.hpp"

namespace dsmooth {

struct SolveParams {
  ScheduleParams schedule;
  std::int64_t max_oracle_calls = 10000;
};

// One row per outer iteration. primal_trw is NaN on rows where the smoothed primal
// bound was not needed; primal_lp is +inf on a final row whose stop was certified
// without a fresh LP recovery.
struct TraceRow {
  std::int64_t iter = 0;
  std::int64_t oracle_calls = 0;
  double rho = 0.0;
  double dual_U = 0.0;
  double dual_smooth = 0.0;
  double primal_lp = 0.0;
  double primal_int = 0.0;
  double primal_trw = 0.0;
  double gap_abs = 0.0;
  double gap_rel = 0.0;
};

using SolveTrace = std::vector<TraceRow>;

enum class SolveStatus { converged, budget_exhausted };

// What each oracle call was spent on.
enum class OracleKind { dual_evaluation, primal_recovery, entropic_recovery, inner_cycles };

struct OracleCharge {
  std::int64_t iter = 0;
  OracleKind kind = OracleKind::dual_evaluation;
  std::int64_t calls = 0;
  bool rho_changed = false;  // inner_cycles only: caches were rebuilt
  int cycles = 0;            // inner_cycles only
};

struct OracleCounters {
  std::int64_t sweeps = 0;
  std::int64_t rebuilds = 0;
  std::int64_t dual_evaluations = 0;
  std::int64_t primal_recoveries = 0;
  std::int64_t entropic_recoveries = 0;

  std::int64_t total() const
  {
    return sweeps + rebuilds + dual_evaluations + primal_recoveries + entropic_recoveries;
  }
};

struct SolveResult {
  Strategy strategy = Strategy::a_dsal;
  DualVector lambda_final;
  Labeling best_labeling;
  double e_min = 0.0;       // best primal bound (LP or integer)
  double e_int_best = 0.0;
  double dual_final = 0.0;  // U(lambda_final)
  double gap_abs = 0.0;
  double gap_rel = 0.0;
  double rho_final = 0.0;
  std::int64_t oracle_calls = 0;
  SolveStatus status = SolveStatus::budget_exhausted;
  SolveTrace trace;
  OracleCounters counters;
  std::vector<OracleCharge> charges;
  std::vector<RoundingScheme> rounding_winners;  // one per trace row
};

// Numeric failure inside a solve; carries the trace up to the failure.
class solve_error : public numeric_error {
public:
  solve_error(const std::string& what, SolveTrace partial)
  : numeric_error(what)
  , partial_trace(std::move(partial))
  {
  }
  SolveTrace partial_trace;
};

// Diminishing-smoothing outer loop shared by all four strategies:
//   1. stop if E_min - U(lambda) < eps
//   2. pick the next rho (never larger than the current one)
//   3. inner_cycles S-TRWS sweeps at the new rho
//   4. E_min := min(E_min, LP bound, rounded integer bound)
// Oracle calls: one per sweep, one per cache rebuild, one per dual evaluation
// (min-plus and sum-product pass), one per LP primal recovery and one per smoothed
// primal recovery. E_min starts at the energy of the greedy labeling.
SolveResult solve(const GridModel& model, Strategy strategy, const SolveParams& params);

double relative_gap(double gap_abs, double e_min);

struct StrategyRun {
  Strategy strategy = Strategy::a_dsal;
  std::optional<SolveResult> result;
  std::string error;
  // Oracle calls at the first trace row meeting the stopping test, if any.
  std::optional<std::int64_t> calls_to_target;
};

// Runs every strategy on the same model with the same parameters. A failing strategy
// is reported in its entry and does not stop the others.
std::vector<StrategyRun> compare_strategies(const GridModel& model,
                                            const std::vector<Strategy>& strategies,
                                            const SolveParams& params);

void write_comparison_table(std::ostream& out, const std::vector<StrategyRun>& runs);

}

#endif
