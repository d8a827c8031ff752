#include "dsmooth/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "dsmooth/errors.hpp"

namespace dsmooth {

std::string_view to_string(Strategy s)
{
  switch (s) {
  case Strategy::a_dsal: return "a-dsal";
  case Strategy::wc_dsal: return "wc-dsal";
  case Strategy::a_strws: return "a-strws";
  case Strategy::wc_strws: return "wc-strws";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name)
{
  for (Strategy s : {Strategy::a_dsal, Strategy::wc_dsal, Strategy::a_strws, Strategy::wc_strws})
    if (to_string(s) == name)
      return s;
  return std::nullopt;
}

void ScheduleParams::validate() const
{
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw input_error("epsilon must be positive");
  if (!(gamma > 1.0) || !std::isfinite(gamma))
    throw input_error("gamma must be greater than 1");
  if (!(eta > 1.0) || !std::isfinite(eta))
    throw input_error("eta must be greater than 1");
  if (inner_cycles < 1)
    throw input_error("inner cycle count must be positive");
  if (rho0 && (!(*rho0 > 0.0) || !std::isfinite(*rho0)))
    throw input_error("rho0 must be positive");
  if (rho_floor && (!(*rho_floor > 0.0) || !std::isfinite(*rho_floor)))
    throw input_error("rho floor must be positive");
}

double absolute_epsilon(const ScheduleParams& params, double e_min)
{
  return params.relative ? params.epsilon * std::abs(e_min) : params.epsilon;
}

double default_rho_floor(double epsilon_abs, double log_labelspace)
{
  return epsilon_abs / (20.0 * 2.0 * log_labelspace);
}

double wc_fixed_rho(double epsilon, double log_labelspace)
{
  return epsilon / (4.0 * log_labelspace);
}

double smoothing_gap_estimate(ScheduleState& state, double u_t, double u_smooth_t)
{
  state.u_max = state.has_u_max ? std::max(state.u_max, u_t) : u_t;
  state.has_u_max = true;
  return state.u_max - u_smooth_t;
}

double astrws_update(const ScheduleState& state, const ScheduleParams& params,
                     double epsilon_abs, double rho_floor, double smoothed_gap)
{
  const double target = epsilon_abs / 2;
  double rho = state.rho_t;
  if (state.delta_hat >= target) {
    double candidate = 0.0;
    if (state.delta_t > delta_min) {
      const double alpha = state.delta_hat - state.delta_t * state.rho_t;
      candidate = (target - alpha) / state.delta_t;
    }
    if (!(candidate > 0.0) || !std::isfinite(candidate))
      candidate = state.rho_t / params.eta;
    rho = std::min(rho, candidate);
  }
  if (smoothed_gap <= target)
    rho /= params.eta;
  return std::min(state.rho_t, std::max(rho_floor, rho));
}

double wc_dsal_next(double e_min, double u_smooth, const ScheduleParams& params,
                    double log_labelspace)
{
  return (e_min - u_smooth) / (4.0 * params.gamma * log_labelspace);
}

double adsal_next(const ScheduleState& state, const ScheduleParams& params,
                  double log_labelspace, double rho_floor)
{
  const double gap = state.e_min - state.u_smooth;
  double candidate = 0.0;
  bool degenerate = !(state.delta_t >= delta_min);
  if (!degenerate) {
    const double alpha = state.delta_hat - state.delta_t * state.rho_t;
    candidate = gap / (2.0 * state.delta_t * params.gamma) - alpha / state.delta_t;
    degenerate = !(candidate > 0.0) || !std::isfinite(candidate);
  }
  if (degenerate)
    candidate = wc_dsal_next(state.e_min, state.u_smooth, params, log_labelspace);
  // The affine model may trust a smoothing gap far below the worst case; never step
  // past the point where the worst-case gap would eat half the duality gap.
  candidate = std::min(candidate, admissible_rho_limit(state.e_min, state.u_smooth, log_labelspace));
  return std::min(state.rho_t, std::max(rho_floor, candidate));
}

bool adsal_stall_check(double smoothed_gap, double e_min, double u_smooth,
                       const ScheduleParams& params)
{
  return smoothed_gap <= (e_min - u_smooth) / (2.0 * params.gamma);
}

double admissible_rho_limit(double e_min, double u_smooth, double log_labelspace)
{
  return (1.0 - 1e-9) * (e_min - u_smooth) / (4.0 * log_labelspace);
}

bool rho_admissible(double rho_candidate, double e_min, double u_smooth, double log_labelspace)
{
  const double gap = e_min - u_smooth;
  const double worst_case = 2.0 * rho_candidate * log_labelspace;
  return gap > 0.0 ? worst_case < gap / 2 : worst_case <= gap / 2;
}

}
