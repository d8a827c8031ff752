#ifndef DSMOOTH_TRANSPORT_HPP
#define DSMOOTH_TRANSPORT_HPP

#include <vector>

#include "dsmooth/model.hpp"

namespace dsmooth {

// min <cost, plan> over nonnegative plans with the given row and column sums.
// cost is rows x cols, row-major.
struct TransportProblem {
  index rows = 0;
  index cols = 0;
  std::vector<double> cost;
  std::vector<double> row_marginals;
  std::vector<double> col_marginals;
};

struct TransportPlan {
  index rows = 0;
  index cols = 0;
  std::vector<double> mass;
  double objective = 0.0;          // <cost, plan>
  double regularized = 0.0;        // objective + tau * KL(plan || rows x cols), entropic solver only
  double marginal_residual = 0.0;  // max absolute row/column sum violation
  int iterations = 0;

  double operator()(index a, index b) const { return mass[a * cols + b]; }
};

// Transportation simplex: north-west corner start, Bland's rule for entering and
// leaving cells. Zero-mass rows and columns are dropped before solving and come back
// as zero rows/columns of the plan.
TransportPlan solve_transport(const TransportProblem& problem);

// argmin <cost, P> + tau * sum P_ab ln(P_ab / (r_a c_b)), tau = rho * edge_multiplicity,
// over the same polytope. The optimum has the form P_ab = r_a c_b exp((f_a + g_b - cost_ab) / tau);
// f, g are found by log-domain Sinkhorn scaling, finished by damped Newton steps on the
// dual when scaling stalls (small tau).
TransportPlan solve_entropic_transport(const TransportProblem& problem, double rho,
                                       int edge_multiplicity);

}

#endif
