#include "lslp/qp_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Eigenvalues>

#include "lslp/geometry.hpp"

namespace lslp {

SimplexQp SimplexQp::from_dense(Matrix q, Vector c) {
  SimplexQp qp;
  qp.dim = static_cast<std::size_t>(c.size());
  auto shared = std::make_shared<const Matrix>(std::move(q));
  qp.apply = [shared](const Vector& x, Vector& out) { out.noalias() = *shared * x; };
  qp.materialize = [shared] { return *shared; };
  qp.linear = std::move(c);
  return qp;
}

Vector SimplexQp::apply_q(const Vector& x) const {
  Vector out(static_cast<Eigen::Index>(dim));
  apply(x, out);
  return out;
}

Vector SimplexQp::gradient(const Vector& x) const { return apply_q(x) + linear; }

double SimplexQp::objective(const Vector& x) const {
  return 0.5 * x.dot(apply_q(x)) + linear.dot(x);
}

Matrix SimplexQp::dense() const {
  if (materialize) return materialize();
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix q(n, n);
  Vector unit = Vector::Zero(n);
  Vector column(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    unit[j] = 1.0;
    apply(unit, column);
    q.col(j) = column;
    unit[j] = 0.0;
  }
  return q;
}

double simplex_vi_residual(const Vector& mu, const Vector& grad) {
  if (mu.size() != grad.size() || mu.size() == 0) {
    throw std::invalid_argument("simplex_vi_residual: dimension mismatch");
  }
  return grad.dot(mu) - grad.minCoeff();
}

double estimate_lipschitz(const SimplexQp& problem, int iterations) {
  const auto n = static_cast<Eigen::Index>(problem.dim);
  Vector v(n);
  for (Eigen::Index j = 0; j < n; ++j) v[j] = 1.0 + 0.1 * static_cast<double>(j % 7);
  v.normalize();
  Vector w(n);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    problem.apply(v, w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lambda = norm;
    v = w / norm;
  }
  return lambda;
}

namespace {

Vector feasible_start(const SimplexQp& problem, const Vector* warm_start) {
  const auto n = static_cast<Eigen::Index>(problem.dim);
  if (warm_start != nullptr && warm_start->size() == n && warm_start->allFinite()) {
    return project_simplex(*warm_start);
  }
  return Vector::Constant(n, 1.0 / static_cast<double>(n));
}

// Primal active-set method. The working set holds coordinates fixed at zero;
// on the remaining face the equality-constrained subproblem is solved in a
// null-space basis of 1^T. Directions of zero curvature with a nonzero slope
// are followed to the boundary, so singular Q is handled.
QpResult solve_active_set(const SimplexQp& problem, const QpOptions& options, Vector x) {
  const auto n = static_cast<Eigen::Index>(problem.dim);
  const Matrix q = problem.dense();
  const Vector& c = problem.linear;

  std::vector<bool> free(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) free[static_cast<std::size_t>(j)] = x[j] > 0.0;

  QpResult result;
  Vector g = q * x + c;
  bool face_solved = false;
  std::vector<Eigen::Index> face;
  Eigen::SelfAdjointEigenSolver<Matrix> eig;

  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    result.iterations = it + 1;
    Eigen::Index j_min = 0;
    const double g_min = g.minCoeff(&j_min);
    const double nu = g.dot(x);
    if (nu - g_min <= options.tolerance) break;

    face.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (free[static_cast<std::size_t>(j)]) face.push_back(j);
    }
    const auto m = static_cast<Eigen::Index>(face.size());
    double face_residual = 0.0;
    for (Eigen::Index j : face) face_residual = std::max(face_residual, std::abs(g[j] - nu));

    const bool release_candidate = !free[static_cast<std::size_t>(j_min)];
    if (release_candidate &&
        (m <= 1 || face_solved || face_residual <= 0.25 * options.tolerance)) {
      free[static_cast<std::size_t>(j_min)] = true;
      face_solved = false;
      continue;
    }
    if (m <= 1) break;

    // Null-space basis Z = [I; -1^T] of the face's sum constraint.
    const Eigen::Index last = face.back();
    Matrix h(m - 1, m - 1);
    Vector r(m - 1);
    for (Eigen::Index a = 0; a < m - 1; ++a) {
      const Eigen::Index ja = face[static_cast<std::size_t>(a)];
      r[a] = g[ja] - g[last];
      for (Eigen::Index b = 0; b < m - 1; ++b) {
        const Eigen::Index jb = face[static_cast<std::size_t>(b)];
        h(a, b) = q(ja, jb) - q(ja, last) - q(last, jb) + q(last, last);
      }
    }
    eig.compute(h);
    const Vector& lam = eig.eigenvalues();
    const Matrix& vecs = eig.eigenvectors();
    const double lam_max = std::max(lam.maxCoeff(), 0.0);
    const double null_threshold = 1e-10 * lam_max;
    const Vector w = vecs.transpose() * r;
    Vector z_null = Vector::Zero(m - 1);
    Vector z_newton = Vector::Zero(m - 1);
    for (Eigen::Index k = 0; k < m - 1; ++k) {
      if (lam[k] <= null_threshold) {
        z_null -= w[k] * vecs.col(k);
      } else {
        z_newton -= (w[k] / lam[k]) * vecs.col(k);
      }
    }
    const bool zero_curvature = z_null.norm() > 1e-9 * r.norm();
    const Vector& z = zero_curvature ? z_null : z_newton;

    Vector p = Vector::Zero(n);
    double p_last = 0.0;
    for (Eigen::Index a = 0; a < m - 1; ++a) {
      p[face[static_cast<std::size_t>(a)]] = z[a];
      p_last -= z[a];
    }
    p[last] = p_last;

    const double slope = g.dot(p);
    if (!(slope < 0.0)) {
      // No descent left on this face at working precision.
      if (release_candidate) {
        free[static_cast<std::size_t>(j_min)] = true;
        face_solved = false;
        continue;
      }
      break;
    }
    const Vector qp = q * p;
    const double curvature = p.dot(qp);
    double t_max = std::numeric_limits<double>::infinity();
    Eigen::Index blocking = -1;
    for (Eigen::Index j : face) {
      if (p[j] < 0.0) {
        const double t = -x[j] / p[j];
        if (t < t_max) {
          t_max = t;
          blocking = j;
        }
      }
    }
    const double t_star =
        curvature > 0.0 ? -slope / curvature : std::numeric_limits<double>::infinity();
    const bool blocked = t_max <= t_star;
    const double t = blocked ? t_max : t_star;
    x += t * p;
    if (blocked && blocking >= 0) {
      x[blocking] = 0.0;
      free[static_cast<std::size_t>(blocking)] = false;
    }
    for (Eigen::Index j : face) {
      if (x[j] <= 0.0) {
        x[j] = 0.0;
        free[static_cast<std::size_t>(j)] = false;
      }
    }
    face_solved = !blocked && !zero_curvature;
    g = q * x + c;
    if (options.observer) options.observer(x);
  }

  x = x.cwiseMax(0.0);
  x /= x.sum();
  result.solution = std::move(x);
  result.vi_residual = simplex_vi_residual(result.solution, problem.gradient(result.solution));
  result.converged = result.vi_residual <= options.tolerance;
  return result;
}

// Projected gradient with step 1/L and optional Nesterov momentum. The
// momentum is reset whenever the objective would increase; if a plain step
// still increases it, L is doubled.
QpResult solve_projected_gradient(const SimplexQp& problem, const QpOptions& options, Vector x) {
  double lipschitz = estimate_lipschitz(problem, 20);
  if (lipschitz <= 0.0) lipschitz = 1.0;
  QpResult result;
  Vector y = x;
  double momentum = 1.0;
  Vector g(static_cast<Eigen::Index>(problem.dim));
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    result.iterations = it + 1;
    const Vector g_x = problem.gradient(x);
    if (simplex_vi_residual(x, g_x) <= options.tolerance) break;
    g = problem.gradient(y);
    Vector x_next = project_simplex(y - g / lipschitz);
    // Objective change from the step itself; differencing two objective
    // values stalls near the optimum. The gradient is shifted by a constant,
    // which is exact since d sums to zero, so the rounding of sum(d) does not
    // swamp the true change.
    const Vector d = x_next - x;
    const Vector g_shift = g_x.array() - g_x.dot(x);
    const double change = d.dot(g_shift + 0.5 * problem.apply_q(d));
    if (change > 0.0) {
      if (options.accelerate && (y - x).squaredNorm() > 0.0) {
        y = x;
        momentum = 1.0;
      } else {
        lipschitz *= 2.0;
      }
      continue;
    }
    if (options.accelerate) {
      const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      y = x_next + ((momentum - 1.0) / next_momentum) * (x_next - x);
      momentum = next_momentum;
    } else {
      y = x_next;
    }
    x = std::move(x_next);
    if (options.observer) options.observer(x);
  }
  result.solution = std::move(x);
  result.vi_residual = simplex_vi_residual(result.solution, problem.gradient(result.solution));
  result.converged = result.vi_residual <= options.tolerance;
  return result;
}

}  // namespace

QpResult solve_simplex_qp(const SimplexQp& problem, const QpOptions& options,
                          const Vector* warm_start) {
  if (problem.dim == 0 || static_cast<std::size_t>(problem.linear.size()) != problem.dim) {
    throw QpError("simplex QP: linear term does not match dimension");
  }
  if (!problem.linear.allFinite()) throw QpError("simplex QP: non-finite linear term");
  Vector x = feasible_start(problem, warm_start);
  if (problem.dim == 1) {
    QpResult trivial;
    trivial.solution = x;
    trivial.converged = true;
    return trivial;
  }
  return options.method == QpMethod::kActiveSet ? solve_active_set(problem, options, std::move(x))
                                                : solve_projected_gradient(problem, options,
                                                                           std::move(x));
}

}  // namespace lslp
