#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>

#include <Eigen/Core>

#include "lslp/factor_graph.hpp"

namespace lslp {

using Matrix = Eigen::MatrixXd;

/// min 1/2 <x, Q x> + <c, x>  subject to  x on the probability simplex.
///
/// Q is symmetric positive semi-definite and given as an operator. A dense
/// form is needed only by the active-set method; it is obtained from
/// `materialize` when provided and by probing `apply` otherwise.
struct SimplexQp {
  std::size_t dim = 0;
  std::function<void(const Vector& x, Vector& out)> apply;
  std::function<Matrix()> materialize;
  Vector linear;

  static SimplexQp from_dense(Matrix q, Vector c);

  Vector apply_q(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  double objective(const Vector& x) const;
  Matrix dense() const;
};

class QpError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class QpMethod { kActiveSet, kProjectedGradient };

struct QpOptions {
  QpMethod method = QpMethod::kActiveSet;
  double tolerance = 1e-9;
  std::size_t max_iterations = 500;
  /// Nesterov momentum for the projected-gradient method.
  bool accelerate = true;
  /// Called with every accepted iterate (tests use it to watch monotonicity).
  std::function<void(const Vector&)> observer;
};

struct QpResult {
  Vector solution;
  double vi_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Solves a SimplexQp starting from `warm_start` (projected onto the
/// simplex) or from the barycenter. Throws QpError when the linear term is
/// not finite. Running out of iterations is not an error: the best iterate
/// is returned with `converged == false`.
QpResult solve_simplex_qp(const SimplexQp& problem, const QpOptions& options = {},
                          const Vector* warm_start = nullptr);

/// max_j <grad, mu - e_j>: zero or negative iff mu minimizes <grad, .> over
/// the simplex.
double simplex_vi_residual(const Vector& mu, const Vector& grad);

/// Largest eigenvalue of Q estimated by power iteration.
double estimate_lipschitz(const SimplexQp& problem, int iterations = 20);

}  // namespace lslp
