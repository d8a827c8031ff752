#include "dsmooth/driver.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "dsmooth/strws.hpp"

namespace dsmooth {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

bool adaptive(Strategy s) { return s == Strategy::a_dsal || s == Strategy::a_strws; }

bool stop_test(double gap_abs, double epsilon_abs)
{
  return gap_abs < epsilon_abs || gap_abs <= 0.0;
}

class Solver {
public:
  Solver(const GridModel& model, Strategy strategy, const SolveParams& params)
  : model_(model)
  , dec_(split_grid(model))
  , strategy_(strategy)
  , params_(params)
  , log_labelspace_(model.log_labelspace())
  {
    result_.strategy = strategy;
  }

  SolveResult run()
  {
    try {
      iterate();
    } catch (const numeric_error& e) {
      throw solve_error(e.what(), result_.trace);
    }
    return std::move(result_);
  }

private:
  std::int64_t calls() const { return result_.counters.total(); }

  void charge(OracleKind kind, std::int64_t n, bool rho_changed = false, int cycles = 0)
  {
    auto& c = result_.counters;
    switch (kind) {
    case OracleKind::dual_evaluation: c.dual_evaluations += n; break;
    case OracleKind::primal_recovery: c.primal_recoveries += n; break;
    case OracleKind::entropic_recovery: c.entropic_recoveries += n; break;
    case OracleKind::inner_cycles: break;
    }
    result_.charges.push_back({iter_, kind, n, rho_changed, cycles});
  }

  double epsilon_abs() const { return absolute_epsilon(params_.schedule, e_min_); }

  double rho_floor() const
  {
    if (params_.schedule.rho_floor)
      return *params_.schedule.rho_floor;
    const double eps = epsilon_abs() > 0.0 ? epsilon_abs() : params_.schedule.epsilon;
    return default_rho_floor(eps, log_labelspace_);
  }

  // Any positive finite value, for a degenerate label space where smoothing is exact.
  static double sanitize(double rho, double fallback)
  {
    if (rho > 0.0 && std::isfinite(rho))
      return rho;
    return fallback > 0.0 && std::isfinite(fallback) ? fallback : 1.0;
  }

  double initial_rho(double u0)
  {
    const auto& sp = params_.schedule;
    if (sp.rho0)
      return *sp.rho0;
    if (strategy_ == Strategy::wc_strws)
      return sanitize(wc_fixed_rho(epsilon_abs(), log_labelspace_), rho_floor());
    const double automatic = wc_dsal_next(e_min_, u0, sp, log_labelspace_);
    return sanitize(std::max(rho_floor(), automatic), rho_floor());
  }

  // One dual evaluation, then LP primal recovery and rounding unless the bound already
  // in hand certifies the stop, in which case the row's primal_lp stays at infinity.
  void evaluate(double rho)
  {
    eval_ = evaluate_dual(model_, dec_, state_->lambda(), rho);
    charge(OracleKind::dual_evaluation, 1);
    if (stop_test(e_min_ - eval_.dual, epsilon_abs())) {
      e_lp_ = std::numeric_limits<double>::infinity();
      return;
    }
    auto [mu, e_lp] = primal_lp_bound(model_, eval_.marginals);
    charge(OracleKind::primal_recovery, 1);
    e_lp_ = e_lp;
    rounding_ = round_integer(model_, mu);
    e_min_ = std::min({e_min_, e_lp_, rounding_.energy});
    if (rounding_.energy < result_.e_int_best) {
      result_.e_int_best = rounding_.energy;
      result_.best_labeling = rounding_.labeling;
    }
  }

  void record(double primal_trw)
  {
    TraceRow row;
    row.iter = iter_;
    row.oracle_calls = calls();
    row.rho = state_->rho();
    row.dual_U = eval_.dual;
    row.dual_smooth = eval_.smoothed;
    row.primal_lp = e_lp_;
    row.primal_int = rounding_.energy;
    row.primal_trw = primal_trw;
    row.gap_abs = e_min_ - eval_.dual;
    row.gap_rel = relative_gap(row.gap_abs, e_min_);
    result_.trace.push_back(row);
    result_.rounding_winners.push_back(rounding_.scheme);
  }

  double next_rho(double& primal_trw)
  {
    const auto& sp = params_.schedule;
    const double rho = state_->rho();
    const double floor = rho_floor();

    sched_.rho_t = rho;
    sched_.e_min = e_min_;
    sched_.u_smooth = eval_.smoothed;
    sched_.delta_t = -eval_.d_smoothed_d_rho;
    sched_.delta_hat = smoothing_gap_estimate(sched_, eval_.dual, eval_.smoothed);
    sched_.alpha_t = sched_.delta_hat - sched_.delta_t * rho;

    double smoothed_gap = nan;
    if (adaptive(strategy_)) {
      const auto trw = primal_trw_bound(model_, dec_, eval_.marginals, rho);
      charge(OracleKind::entropic_recovery, 1);
      primal_trw = trw.second;
      smoothed_gap = primal_trw - eval_.smoothed;
    }

    double next = rho;
    switch (strategy_) {
    case Strategy::wc_strws:
      next = std::min(rho, sanitize(wc_fixed_rho(epsilon_abs(), log_labelspace_), rho));
      break;
    case Strategy::wc_dsal:
      next = std::min(rho, std::max(floor, wc_dsal_next(e_min_, eval_.smoothed, sp,
                                                       log_labelspace_)));
      break;
    case Strategy::a_dsal:
      next = adsal_next(sched_, sp, log_labelspace_, floor);
      if (adsal_stall_check(smoothed_gap, e_min_, eval_.smoothed, sp))
        next = std::min(rho, std::max(floor, next / sp.eta));
      break;
    case Strategy::a_strws:
      next = astrws_update(sched_, sp, epsilon_abs(), floor, smoothed_gap);
      break;
    }
    return sanitize(next, rho);
  }

  void iterate()
  {
    const auto& sp = params_.schedule;
    sp.validate();
    if (params_.max_oracle_calls < 1)
      throw input_error("oracle call budget must be positive");
    model_.validate();

    const Labeling greedy = greedy_labeling(model_);
    e_min_ = energy(model_, greedy);
    result_.e_int_best = e_min_;
    result_.best_labeling = greedy;
    rounding_ = {greedy, e_min_, RoundingScheme::greedy};

    // This min-plus pass is repeated by the first evaluation below; both share its
    // single oracle call.
    const DualVector lambda0(model_);
    const double u0 = dual_value(model_, dec_, lambda0);

    state_.emplace(model_, lambda0, initial_rho(u0));
    evaluate(state_->rho());

    while (true) {
      const double gap = e_min_ - eval_.dual;
      if (stop_test(gap, epsilon_abs())) {
        record(nan);
        result_.status = SolveStatus::converged;
        break;
      }
      if (calls() >= params_.max_oracle_calls) {
        record(nan);
        result_.status = SolveStatus::budget_exhausted;
        break;
      }

      double primal_trw = nan;
      const double rho_next = next_rho(primal_trw);
      record(primal_trw);

      ++iter_;
      state_->set_rho(rho_next);
      const bool rebuild = !state_->cache_valid(opposite(state_->next_direction()));
      const std::int64_t before = state_->oracle_calls();
      run_cycles(*state_, model_, dec_, sp.inner_cycles);
      result_.counters.sweeps = state_->sweeps();
      result_.counters.rebuilds = state_->rebuilds();
      charge(OracleKind::inner_cycles, state_->oracle_calls() - before, rebuild, sp.inner_cycles);

      evaluate(rho_next);
    }

    result_.lambda_final = state_->lambda();
    result_.e_min = e_min_;
    result_.dual_final = eval_.dual;
    result_.gap_abs = e_min_ - eval_.dual;
    result_.gap_rel = relative_gap(result_.gap_abs, e_min_);
    result_.rho_final = state_->rho();
    result_.oracle_calls = calls();
  }

  const GridModel& model_;
  const ChainDecomposition dec_;
  const Strategy strategy_;
  const SolveParams params_;
  const double log_labelspace_;

  SolveResult result_;
  ScheduleState sched_;
  std::optional<SweepState> state_;
  DualEvaluation eval_;
  RoundingResult rounding_;
  double e_lp_ = 0.0;
  double e_min_ = 0.0;
  std::int64_t iter_ = 0;
};

}

double relative_gap(double gap_abs, double e_min)
{
  if (e_min != 0.0)
    return gap_abs / std::abs(e_min);
  return gap_abs <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

SolveResult solve(const GridModel& model, Strategy strategy, const SolveParams& params)
{
  return Solver(model, strategy, params).run();
}

std::vector<StrategyRun> compare_strategies(const GridModel& model,
                                            const std::vector<Strategy>& strategies,
                                            const SolveParams& params)
{
  std::vector<StrategyRun> runs;
  for (Strategy s : strategies) {
    StrategyRun run;
    run.strategy = s;
    try {
      run.result = solve(model, s, params);
      for (const auto& row : run.result->trace) {
        const double e_min = row.gap_abs + row.dual_U;
        if (stop_test(row.gap_abs, absolute_epsilon(params.schedule, e_min))) {
          run.calls_to_target = row.oracle_calls;
          break;
        }
      }
    } catch (const std::exception& e) {
      run.error = e.what();
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

void write_comparison_table(std::ostream& out, const std::vector<StrategyRun>& runs)
{
  out << std::left << std::setw(10) << "strategy" << std::right << std::setw(12) << "calls"
      << std::setw(14) << "to_target" << std::setw(20) << "primal" << std::setw(20) << "dual"
      << std::setw(14) << "gap_rel" << "  status\n";
  for (const auto& run : runs) {
    out << std::left << std::setw(10) << to_string(run.strategy) << std::right;
    if (!run.result) {
      out << "  error: " << run.error << '\n';
      continue;
    }
    const auto& r = *run.result;
    out << std::setw(12) << r.oracle_calls << std::setw(14)
        << (run.calls_to_target ? std::to_string(*run.calls_to_target) : std::string("-"))
        << std::setprecision(10) << std::setw(20) << r.e_min << std::setw(20) << r.dual_final
        << std::setprecision(4) << std::setw(14) << r.gap_rel << "  "
        << (r.status == SolveStatus::converged ? "converged" : "budget_exhausted") << '\n';
  }
}

}
