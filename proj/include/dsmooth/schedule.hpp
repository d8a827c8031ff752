#ifndef DSMOOTH_SCHEDULE_HPP
#define DSMOOTH_SCHEDULE_HPP

#include <optional>
#include <string>
#include <string_view>

namespace dsmooth {

// Smoothing selection strategies.
//   a_dsal   adaptive diminishing smoothing (affine gap model + stall check)
//   wc_dsal  worst-case diminishing smoothing, rho = gap / (4 gamma ln|X|)
//   a_strws  precision oriented, adaptive gap estimate with the anti-stall restart
//   wc_strws precision oriented, fixed rho = eps / (4 ln|X|)
enum class Strategy { a_dsal, wc_dsal, a_strws, wc_strws };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

struct ScheduleParams {
  double epsilon = 1e-3;
  bool relative = false;
  double gamma = 4.0;
  double eta = 2.0;
  int inner_cycles = 3;
  std::optional<double> rho0;        // empty: automatic
  std::optional<double> rho_floor;   // empty: eps / (40 ln|X|)

  // Throws input_error on gamma <= 1, eta <= 1, eps <= 0, inner_cycles < 1,
  // or a non-positive explicit rho0 / rho_floor.
  void validate() const;
};

struct ScheduleState {
  double rho_t = 0.0;
  double u_max = 0.0;      // running max of U over all iterates
  bool has_u_max = false;
  double delta_hat = 0.0;  // local smoothing gap estimate
  double delta_t = 0.0;    // -dU_rho/drho
  double alpha_t = 0.0;    // intercept of the affine gap model
  double e_min = 0.0;
  double u_smooth = 0.0;
};

// Lower bound on delta below which the affine model is treated as degenerate.
inline constexpr double delta_min = 1e-12;

// Absolute target accuracy for the current best primal bound.
double absolute_epsilon(const ScheduleParams& params, double e_min);

// eps / (20 * 2 ln|X|): a worst-case smoothing gap of eps / 20.
double default_rho_floor(double epsilon_abs, double log_labelspace);

double wc_fixed_rho(double epsilon, double log_labelspace);

// Folds U_t into the running maximum and returns u_max - U_smooth_t.
double smoothing_gap_estimate(ScheduleState& state, double u_t, double u_smooth_t);

// Precision-oriented adaptive rule. state must carry rho_t, delta_t and delta_hat.
double astrws_update(const ScheduleState& state, const ScheduleParams& params,
                     double epsilon_abs, double rho_floor, double smoothed_gap);

// (E_min - U_smooth) / (4 gamma ln|X|)
double wc_dsal_next(double e_min, double u_smooth, const ScheduleParams& params,
                    double log_labelspace);

// Affine-model rho: min(rho_t, (E_min - U_smooth) / (2 delta gamma) - alpha / delta), with
// the worst-case rule as fallback for a degenerate model, capped by admissible_rho_limit
// and clamped to [rho_floor, rho_t].
double adsal_next(const ScheduleState& state, const ScheduleParams& params,
                  double log_labelspace, double rho_floor);

// smoothed_gap <= (E_min - U_smooth) / (2 gamma)
bool adsal_stall_check(double smoothed_gap, double e_min, double u_smooth,
                       const ScheduleParams& params);

// Largest rho that passes rho_admissible, less a relative margin of 1e-9.
double admissible_rho_limit(double e_min, double u_smooth, double log_labelspace);

// Worst-case smoothing gap test for a diminishing schedule:
// 2 rho ln|X| <= (E_min - U_smooth) / 2, strictly when the gap is positive.
// A rho sequence that passes this at every step drives the iterates to the optimum of U.
bool rho_admissible(double rho_candidate, double e_min, double u_smooth, double log_labelspace);

}

#endif
