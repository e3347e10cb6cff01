#include "lslp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace lslp::oracle {

double naive_logpot(const FactorGraph& graph, const Labeling& labeling) {
  double total = 0.0;
  for (std::size_t i = 0; i < graph.num_variables(); ++i) {
    total += graph.unary(i)(static_cast<Eigen::Index>(labeling.states.at(i)));
  }
  for (std::size_t f = 0; f < graph.num_factors(); ++f) {
    const auto& scope = graph.factor(f).scope;
    std::size_t offset = 0;
    std::size_t stride = 1;
    for (std::size_t p = scope.size(); p-- > 0;) {
      offset += labeling.states.at(scope[p]) * stride;
      stride *= graph.cardinality(scope[p]);
    }
    total += graph.factor(f).logpot_table.at(offset);
  }
  return total;
}

MapSolution brute_force_map(const FactorGraph& graph, const OracleLimit& limit) {
  const std::size_t n = graph.num_variables();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > limit.max_total_configs / graph.cardinality(i)) {
      throw TooLargeError("state space exceeds oracle limit of " +
                          std::to_string(limit.max_total_configs) + " configurations");
    }
    total *= graph.cardinality(i);
  }
  Labeling current{std::vector<std::size_t>(n, 0)};
  MapSolution best{current, naive_logpot(graph, current)};
  for (std::size_t count = 1; count < total; ++count) {
    for (std::size_t i = n; i-- > 0;) {
      if (++current.states[i] < graph.cardinality(i)) break;
      current.states[i] = 0;
    }
    const double value = naive_logpot(graph, current);
    if (value > best.logpot) best = MapSolution{current, value};
  }
  return best;
}

Vector bisection_simplex_projection(const Vector& a) {
  // Find tau with sum(max(a - tau, 0)) = 1.
  double lo = a.minCoeff() - 1.0;
  double hi = a.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double mass = (a.array() - mid).max(0.0).sum();
    if (mass > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  Vector x = (a.array() - 0.5 * (lo + hi)).max(0.0);
  return x / x.sum();
}

namespace {

// Michelot's fixed-point projection: drop coordinates that fall below the
// current threshold until the support is stable.
void michelot_projection(const Vector& a, Vector& x, std::vector<char>& active) {
  const auto n = a.size();
  active.assign(static_cast<std::size_t>(n), 1);
  double tau = 0.0;
  for (bool changed = true; changed;) {
    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (active[j]) {
        sum += a[j];
        ++count;
      }
    }
    tau = (sum - 1.0) / static_cast<double>(count);
    changed = false;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (active[j] && a[j] - tau <= 0.0) {
        active[j] = 0;
        changed = true;
      }
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) x[j] = active[j] ? a[j] - tau : 0.0;
}

}  // namespace

Vector pgd_qp_oracle(const SimplexQp& problem, std::size_t horizon) {
  const Matrix q = problem.dense();
  const auto n = q.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q, Eigen::EigenvaluesOnly);
  const double lipschitz = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
  Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector step(n);
  std::vector<char> active;
  for (std::size_t it = 0; it < horizon; ++it) {
    step.noalias() = x - (q * x + problem.linear) / lipschitz;
    michelot_projection(step, x, active);
  }
  return x;
}

Vector support_enumeration_qp(const Matrix& q, const Vector& c) {
  const auto n = q.rows();
  if (n < 1 || n > 20) throw std::invalid_argument("support enumeration needs 1 <= n <= 20");
  const double scale = 1.0 + q.cwiseAbs().maxCoeff() + c.cwiseAbs().maxCoeff();
  Vector best;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (mask & (std::uint64_t{1} << j)) support.push_back(j);
    }
    const auto k = static_cast<Eigen::Index>(support.size());
    // [Q_SS 1; 1^T 0] [x; nu] = [-c_S; 1]
    Matrix kkt = Matrix::Zero(k + 1, k + 1);
    Vector rhs(k + 1);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        kkt(a, b) = q(support[static_cast<std::size_t>(a)], support[static_cast<std::size_t>(b)]);
      }
      kkt(a, k) = 1.0;
      kkt(k, a) = 1.0;
      rhs[a] = -c[support[static_cast<std::size_t>(a)]];
    }
    rhs[k] = 1.0;
    Eigen::FullPivLU<Matrix> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Vector sol = lu.solve(rhs);
    Vector x = Vector::Zero(n);
    bool feasible = true;
    for (Eigen::Index a = 0; a < k; ++a) {
      if (sol[a] < -1e-12) feasible = false;
      x[support[static_cast<std::size_t>(a)]] = std::max(sol[a], 0.0);
    }
    if (!feasible) continue;
    // Multipliers of the inactive bounds must be non-negative.
    const Vector g = q * x + c;
    const double nu = g.dot(x);
    bool optimal = true;
    for (Eigen::Index j = 0; j < n && optimal; ++j) {
      if (g[j] < nu - 1e-9 * scale) optimal = false;
    }
    if (!optimal) continue;
    const double value = 0.5 * x.dot(q * x) + c.dot(x);
    if (value < best_value) {
      best_value = value;
      best = x;
    }
  }
  if (best.size() == 0) throw std::runtime_error("support enumeration found no KKT point");
  return best;
}

}  // namespace lslp::oracle
