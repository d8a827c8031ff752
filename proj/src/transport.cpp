#include "dsmooth/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dsmooth/errors.hpp"
#include "dsmooth/log_sum_exp.hpp"

namespace dsmooth {

namespace {

constexpr double marginal_sum_tolerance = 1e-12;
constexpr int simplex_iteration_cap = 100000;
constexpr int iteration_cap = 10000;
constexpr int sinkhorn_stage_cap = 100;
constexpr double sinkhorn_tolerance = 1e-10;
// Largest stalled residual that is still repaired by rounding instead of reported.
constexpr double repairable_residual = 1e-6;
constexpr int newton_iteration_cap = 200;
constexpr int sinkhorn_continuation_cap = iteration_cap - sinkhorn_stage_cap - 2 * newton_iteration_cap;

// Active (nonzero-mass) rows and columns of a validated problem.
struct Reduced {
  std::vector<index> rows;
  std::vector<index> cols;
  std::vector<double> r;
  std::vector<double> c;
  std::vector<double> cost;  // rows.size() x cols.size()
};

Reduced validate_and_reduce(const TransportProblem& p)
{
  if (p.rows == 0 || p.cols == 0 || p.cost.size() != p.rows * p.cols
      || p.row_marginals.size() != p.rows || p.col_marginals.size() != p.cols)
    throw input_error("transport problem dimensions are inconsistent");

  double row_sum = 0.0, col_sum = 0.0;
  for (double x : p.row_marginals) {
    if (!std::isfinite(x) || x < -marginal_sum_tolerance)
      throw input_error("transport row marginals must be finite and nonnegative");
    row_sum += std::max(x, 0.0);
  }
  for (double x : p.col_marginals) {
    if (!std::isfinite(x) || x < -marginal_sum_tolerance)
      throw input_error("transport column marginals must be finite and nonnegative");
    col_sum += std::max(x, 0.0);
  }
  for (double x : p.cost)
    if (!std::isfinite(x))
      throw input_error("transport cost must be finite");
  if (std::abs(row_sum - col_sum) > marginal_sum_tolerance * std::max(1.0, row_sum)) {
    std::ostringstream s;
    s.precision(17);
    s << "transport marginals are inconsistent: row mass " << row_sum << ", column mass "
      << col_sum;
    throw input_error(s.str());
  }

  Reduced red;
  for (index a = 0; a < p.rows; ++a)
    if (p.row_marginals[a] > 0.0) {
      red.rows.push_back(a);
      red.r.push_back(p.row_marginals[a]);
    }
  for (index b = 0; b < p.cols; ++b)
    if (p.col_marginals[b] > 0.0) {
      red.cols.push_back(b);
      red.c.push_back(p.col_marginals[b]);
    }
  for (index a : red.rows)
    for (index b : red.cols)
      red.cost.push_back(p.cost[a * p.cols + b]);
  return red;
}

TransportPlan expand(const TransportProblem& p, const Reduced& red, const std::vector<double>& x)
{
  TransportPlan plan;
  plan.rows = p.rows;
  plan.cols = p.cols;
  plan.mass.assign(p.rows * p.cols, 0.0);
  const index n = red.cols.size();
  for (index i = 0; i < red.rows.size(); ++i)
    for (index j = 0; j < n; ++j)
      plan.mass[red.rows[i] * p.cols + red.cols[j]] = x[i * n + j];

  for (index k = 0; k < plan.mass.size(); ++k)
    plan.objective += p.cost[k] * plan.mass[k];

  double residual = 0.0;
  for (index a = 0; a < p.rows; ++a) {
    double s = 0.0;
    for (index b = 0; b < p.cols; ++b)
      s += plan.mass[a * p.cols + b];
    residual = std::max(residual, std::abs(s - std::max(p.row_marginals[a], 0.0)));
  }
  for (index b = 0; b < p.cols; ++b) {
    double s = 0.0;
    for (index a = 0; a < p.rows; ++a)
      s += plan.mass[a * p.cols + b];
    residual = std::max(residual, std::abs(s - std::max(p.col_marginals[b], 0.0)));
  }
  plan.marginal_residual = residual;
  return plan;
}

class TransportSimplex {
public:
  TransportSimplex(const Reduced& red)
  : m_(red.rows.size())
  , n_(red.cols.size())
  , cost_(red.cost)
  , x_(m_ * n_, 0.0)
  , basic_(m_ * n_, false)
  {
    north_west_corner(red.r, red.c);
    double scale = 1.0;
    for (double c : cost_)
      scale = std::max(scale, std::abs(c));
    tolerance_ = 1e-12 * scale;
  }

  int solve()
  {
    std::vector<double> u(m_), v(n_);
    for (int it = 0; it < simplex_iteration_cap; ++it) {
      potentials(u, v);
      index entering = m_ * n_;
      for (index k = 0; k < m_ * n_ && entering == m_ * n_; ++k)
        if (!basic_[k] && cost_[k] - u[k / n_] - v[k % n_] < -tolerance_)
          entering = k;
      if (entering == m_ * n_)
        return it;
      pivot(entering);
    }
    throw numeric_error("transportation simplex exceeded its iteration cap");
  }

  const std::vector<double>& flows() const { return x_; }

private:
  void north_west_corner(std::vector<double> r, std::vector<double> c)
  {
    index i = 0, j = 0;
    while (true) {
      const double q = std::min(r[i], c[j]);
      x_[i * n_ + j] = q;
      basic_[i * n_ + j] = true;
      const bool row_done = r[i] <= c[j];
      r[i] -= q;
      c[j] -= q;
      if (i == m_ - 1 && j == n_ - 1)
        break;
      if (j == n_ - 1 || (i < m_ - 1 && row_done))
        ++i;
      else
        ++j;
    }
  }

  // u_i + v_j = cost_ij on basic cells; the basis is a spanning tree of the
  // bipartite row/column graph.
  void potentials(std::vector<double>& u, std::vector<double>& v) const
  {
    std::vector<bool> row_set(m_, false), col_set(n_, false);
    u[0] = 0.0;
    row_set[0] = true;
    std::vector<index> stack = {0};  // nodes: rows 0..m-1, cols m..m+n-1
    while (!stack.empty()) {
      const index node = stack.back();
      stack.pop_back();
      if (node < m_) {
        const index i = node;
        for (index j = 0; j < n_; ++j)
          if (basic_[i * n_ + j] && !col_set[j]) {
            v[j] = cost_[i * n_ + j] - u[i];
            col_set[j] = true;
            stack.push_back(m_ + j);
          }
      } else {
        const index j = node - m_;
        for (index i = 0; i < m_; ++i)
          if (basic_[i * n_ + j] && !row_set[i]) {
            u[i] = cost_[i * n_ + j] - v[j];
            row_set[i] = true;
            stack.push_back(i);
          }
      }
    }
  }

  // Cells on the tree path from row i to column j, in order starting at row i.
  std::vector<index> tree_path(index i, index j) const
  {
    const index nodes = m_ + n_;
    const index none = nodes;
    std::vector<index> parent(nodes, none), via(nodes, 0);
    std::vector<index> queue = {i};
    parent[i] = i;
    for (index q = 0; q < queue.size(); ++q) {
      const index node = queue[q];
      if (node < m_) {
        for (index jj = 0; jj < n_; ++jj)
          if (basic_[node * n_ + jj] && parent[m_ + jj] == none) {
            parent[m_ + jj] = node;
            via[m_ + jj] = node * n_ + jj;
            queue.push_back(m_ + jj);
          }
      } else {
        const index jj = node - m_;
        for (index ii = 0; ii < m_; ++ii)
          if (basic_[ii * n_ + jj] && parent[ii] == none) {
            parent[ii] = node;
            via[ii] = ii * n_ + jj;
            queue.push_back(ii);
          }
      }
    }
    std::vector<index> path;
    for (index node = m_ + j; node != i; node = parent[node])
      path.push_back(via[node]);
    std::reverse(path.begin(), path.end());
    return path;
  }

  void pivot(index entering)
  {
    const index i = entering / n_;
    const index j = entering % n_;
    const auto path = tree_path(i, j);
    // path[0] shares row i with the entering cell; with an odd path length, cells at
    // even positions lose mass and cells at odd positions gain it.
    double theta = std::numeric_limits<double>::infinity();
    index leaving = m_ * n_;
    for (index t = 0; t < path.size(); t += 2) {
      const index cell = path[t];
      if (x_[cell] < theta || (x_[cell] == theta && cell < leaving)) {
        theta = x_[cell];
        leaving = cell;
      }
    }
    x_[entering] += theta;
    for (index t = 0; t < path.size(); ++t)
      x_[path[t]] += (t % 2 == 0) ? -theta : theta;
    x_[leaving] = 0.0;
    basic_[leaving] = false;
    basic_[entering] = true;
  }

  index m_;
  index n_;
  std::vector<double> cost_;
  std::vector<double> x_;
  std::vector<bool> basic_;
  double tolerance_;
};

// Dense Gaussian elimination with partial pivoting; returns false on a singular system.
bool solve_linear(std::vector<double> a, std::vector<double>& b, index n)
{
  for (index col = 0; col < n; ++col) {
    index piv = col;
    for (index r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col]))
        piv = r;
    if (!(std::abs(a[piv * n + col]) > 0.0))
      return false;
    if (piv != col) {
      for (index k = 0; k < n; ++k)
        std::swap(a[col * n + k], a[piv * n + k]);
      std::swap(b[col], b[piv]);
    }
    for (index r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0)
        continue;
      for (index k = col; k < n; ++k)
        a[r * n + k] -= f * a[col * n + k];
      b[r] -= f * b[col];
    }
  }
  for (index col = n; col-- > 0;) {
    double s = b[col];
    for (index k = col + 1; k < n; ++k)
      s -= a[col * n + k] * b[k];
    b[col] = s / a[col * n + col];
  }
  return true;
}

// Log-domain scaling problem: P_ab = exp(log_kernel_ab + f_a + g_b).
class EntropicScaling {
public:
  EntropicScaling(const Reduced& red, double tau)
  : m_(red.rows.size())
  , n_(red.cols.size())
  , r_(red.r)
  , c_(red.c)
  , log_kernel_(m_ * n_)
  , f_(m_, 0.0)
  , g_(n_, 0.0)
  {
    for (index a = 0; a < m_; ++a)
      for (index b = 0; b < n_; ++b)
        log_kernel_[a * n_ + b] = std::log(r_[a]) + std::log(c_[b]) - red.cost[a * n_ + b] / tau;
  }

  // Returns the number of iterations used, or -1 when the cap was hit.
  int sinkhorn(int cap)
  {
    std::vector<double> terms(std::max(m_, n_));
    for (int it = 1; it <= cap; ++it) {
      for (index a = 0; a < m_; ++a) {
        for (index b = 0; b < n_; ++b)
          terms[b] = log_kernel_[a * n_ + b] + g_[b];
        f_[a] = std::log(r_[a]) - log_sum_exp({terms.data(), n_});
      }
      for (index b = 0; b < n_; ++b) {
        for (index a = 0; a < m_; ++a)
          terms[a] = log_kernel_[a * n_ + b] + f_[a];
        g_[b] = std::log(c_[b]) - log_sum_exp({terms.data(), m_});
      }
      if (residual() < sinkhorn_tolerance)
        return it;
    }
    return -1;
  }

  // Damped Newton on the concave dual sum r f + sum c g - sum P(f, g), g_last fixed.
  // On failure the multipliers with the smallest residual seen are kept.
  int newton()
  {
    const int used = newton_steps();
    if (used < 0 && best_residual_ < residual()) {
      f_ = best_f_;
      g_ = best_g_;
    }
    return used;
  }

  int newton_steps()
  {
    const index dim = m_ + n_ - 1;
    best_f_ = f_;
    best_g_ = g_;
    best_residual_ = residual();
    for (int it = 1; it <= newton_iteration_cap; ++it) {
      const auto p = plan();
      std::vector<double> row(m_, 0.0), col(n_, 0.0);
      for (index a = 0; a < m_; ++a)
        for (index b = 0; b < n_; ++b) {
          row[a] += p[a * n_ + b];
          col[b] += p[a * n_ + b];
        }
      std::vector<double> grad(dim);
      for (index a = 0; a < m_; ++a)
        grad[a] = r_[a] - row[a];
      for (index b = 0; b + 1 < n_; ++b)
        grad[m_ + b] = c_[b] - col[b];

      std::vector<double> hess(dim * dim, 0.0);
      for (index a = 0; a < m_; ++a)
        hess[a * dim + a] = row[a];
      for (index b = 0; b + 1 < n_; ++b) {
        hess[(m_ + b) * dim + m_ + b] = col[b];
        for (index a = 0; a < m_; ++a) {
          hess[a * dim + m_ + b] = p[a * n_ + b];
          hess[(m_ + b) * dim + a] = p[a * n_ + b];
        }
      }
      // Jacobi scaling: rows of vanishing mass would otherwise make the system
      // numerically singular.
      std::vector<double> scale(dim);
      for (index k = 0; k < dim; ++k)
        scale[k] = 1.0 / std::sqrt(hess[k * dim + k] + 1e-300);
      for (index i = 0; i < dim; ++i) {
        for (index j = 0; j < dim; ++j)
          hess[i * dim + j] *= scale[i] * scale[j];
        hess[i * dim + i] += 1e-12;
      }
      std::vector<double> step(dim);
      for (index k = 0; k < dim; ++k)
        step[k] = grad[k] * scale[k];
      if (!solve_linear(hess, step, dim))
        return -1;
      for (index k = 0; k < dim; ++k)
        step[k] *= scale[k];

      // Near the optimum the objective gain drops below rounding, hence the slack.
      const double base = dual_objective(f_, g_);
      const double slack = 1e-13 * (1.0 + std::abs(base));
      double t = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 80; ++ls, t /= 2) {
        auto f = f_;
        auto g = g_;
        for (index a = 0; a < m_; ++a)
          f[a] += t * step[a];
        for (index b = 0; b + 1 < n_; ++b)
          g[b] += t * step[m_ + b];
        const double value = dual_objective(f, g);
        if (std::isfinite(value) && value >= base - slack) {
          f_ = std::move(f);
          g_ = std::move(g);
          accepted = true;
          break;
        }
      }
      if (!accepted)
        return -1;
      const double res = residual();
      if (res < best_residual_) {
        best_f_ = f_;
        best_g_ = g_;
        best_residual_ = res;
      }
      if (res < sinkhorn_tolerance)
        return it;
    }
    return -1;
  }

  std::vector<double> plan() const
  {
    std::vector<double> p(m_ * n_);
    for (index a = 0; a < m_; ++a)
      for (index b = 0; b < n_; ++b)
        p[a * n_ + b] = std::exp(log_kernel_[a * n_ + b] + f_[a] + g_[b]);
    return p;
  }

  // Nearest-feasible rounding: scale down rows and columns that carry too much mass,
  // then spread the remaining deficits as a rank-one correction. Moves the plan by at
  // most twice the marginal residual in l1.
  std::vector<double> rounded_plan() const
  {
    auto p = plan();
    for (index a = 0; a < m_; ++a) {
      double s = 0.0;
      for (index b = 0; b < n_; ++b)
        s += p[a * n_ + b];
      if (s > r_[a])
        for (index b = 0; b < n_; ++b)
          p[a * n_ + b] *= r_[a] / s;
    }
    for (index b = 0; b < n_; ++b) {
      double s = 0.0;
      for (index a = 0; a < m_; ++a)
        s += p[a * n_ + b];
      if (s > c_[b])
        for (index a = 0; a < m_; ++a)
          p[a * n_ + b] *= c_[b] / s;
    }
    std::vector<double> dr(m_), dc(n_);
    double total = 0.0;
    for (index a = 0; a < m_; ++a) {
      double s = 0.0;
      for (index b = 0; b < n_; ++b)
        s += p[a * n_ + b];
      dr[a] = std::max(0.0, r_[a] - s);
      total += dr[a];
    }
    for (index b = 0; b < n_; ++b) {
      double s = 0.0;
      for (index a = 0; a < m_; ++a)
        s += p[a * n_ + b];
      dc[b] = std::max(0.0, c_[b] - s);
    }
    if (total > 0.0)
      for (index a = 0; a < m_; ++a)
        for (index b = 0; b < n_; ++b)
          p[a * n_ + b] += dr[a] * dc[b] / total;
    return p;
  }

  double residual() const
  {
    const auto p = plan();
    double res = 0.0;
    for (index a = 0; a < m_; ++a) {
      double s = 0.0;
      for (index b = 0; b < n_; ++b)
        s += p[a * n_ + b];
      res = std::max(res, std::abs(s - r_[a]));
    }
    for (index b = 0; b < n_; ++b) {
      double s = 0.0;
      for (index a = 0; a < m_; ++a)
        s += p[a * n_ + b];
      res = std::max(res, std::abs(s - c_[b]));
    }
    return res;
  }

private:
  double dual_objective(const std::vector<double>& f, const std::vector<double>& g) const
  {
    double value = 0.0;
    for (index a = 0; a < m_; ++a)
      value += r_[a] * f[a];
    for (index b = 0; b < n_; ++b)
      value += c_[b] * g[b];
    for (index a = 0; a < m_; ++a)
      for (index b = 0; b < n_; ++b)
        value -= std::exp(log_kernel_[a * n_ + b] + f[a] + g[b]);
    return value;
  }

  index m_;
  index n_;
  std::vector<double> r_;
  std::vector<double> c_;
  std::vector<double> log_kernel_;
  std::vector<double> f_;
  std::vector<double> g_;
  std::vector<double> best_f_;
  std::vector<double> best_g_;
  double best_residual_ = 0.0;
};

}

TransportPlan solve_transport(const TransportProblem& problem)
{
  const Reduced red = validate_and_reduce(problem);
  if (red.rows.empty() || red.cols.empty())
    return expand(problem, red, {});
  TransportSimplex simplex(red);
  const int iterations = simplex.solve();
  auto plan = expand(problem, red, simplex.flows());
  plan.iterations = iterations;
  plan.regularized = plan.objective;
  return plan;
}

TransportPlan solve_entropic_transport(const TransportProblem& problem, double rho,
                                       int edge_multiplicity)
{
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw input_error("entropic transport needs a positive finite rho");
  if (edge_multiplicity < 1)
    throw input_error("edge multiplicity must be positive");
  const double tau = rho * edge_multiplicity;
  const Reduced red = validate_and_reduce(problem);
  if (red.rows.empty() || red.cols.empty())
    return expand(problem, red, {});

  // Scaling converges fast on most edges; Newton finishes the stiff ones. When Newton
  // cannot see a row or column whose entries underflowed, scaling resumes from Newton's
  // best point and Newton gets a second try.
  EntropicScaling scaling(red, tau);
  int iterations = 0;
  bool converged = false;
  for (const auto& [stage, cap] : {std::pair{0, sinkhorn_stage_cap}, std::pair{1, newton_iteration_cap},
                                   std::pair{0, sinkhorn_continuation_cap},
                                   std::pair{1, newton_iteration_cap}}) {
    const int used = stage == 0 ? scaling.sinkhorn(cap) : scaling.newton();
    iterations += used < 0 ? cap : used;
    if (used >= 0) {
      converged = true;
      break;
    }
  }
  if (!converged && scaling.residual() > repairable_residual) {
    std::ostringstream s;
    s.precision(6);
    s << "entropic transport did not converge (tau " << tau << ", " << red.rows.size() << "x"
      << red.cols.size() << ", marginal residual " << scaling.residual() << ")";
    throw numeric_error(s.str());
  }

  auto plan = expand(problem, red, scaling.rounded_plan());
  plan.iterations = iterations;
  double kl = 0.0;
  for (index a = 0; a < problem.rows; ++a)
    for (index b = 0; b < problem.cols; ++b) {
      const double p = plan(a, b);
      if (p > 0.0)
        kl += p * (std::log(p) - std::log(problem.row_marginals[a])
                   - std::log(problem.col_marginals[b]));
    }
  plan.regularized = plan.objective + tau * kl;
  return plan;
}

}
