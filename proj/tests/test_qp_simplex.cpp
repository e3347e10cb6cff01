#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "lslp/oracle.hpp"
#include "lslp/qp_simplex.hpp"

using namespace lslp;

namespace {

// Random PSD matrix of rank r, scaled so its largest eigenvalue is O(scale).
Matrix random_psd(std::mt19937_64& rng, int n, int r, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix b(n, r);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r; ++j) b(i, j) = normal(rng);
  return scale * b * b.transpose() / static_cast<double>(std::max(r, 1));
}

Vector random_vec(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector c(n);
  for (int i = 0; i < n; ++i) c(i) = normal(rng);
  return c;
}

double brute_vi(const Vector& mu, const Vector& grad) {
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    Vector e = Vector::Zero(mu.size());
    e(j) = 1.0;
    best = std::max(best, grad.dot(mu - e));
  }
  return best;
}

}  // namespace

TEST_CASE("small closed-form instances") {
  for (QpMethod method : {QpMethod::kActiveSet, QpMethod::kProjectedGradient}) {
    QpOptions opts;
    opts.method = method;
    const QpResult a = solve_simplex_qp(SimplexQp::from_dense(Matrix::Identity(2, 2), Vector::Zero(2)), opts);
    CHECK(std::abs(a.solution(0) - 0.5) <= 1e-9);
    CHECK(std::abs(a.solution(1) - 0.5) <= 1e-9);
    Vector c(2);
    c << 0.0, -1.0;
    const QpResult b = solve_simplex_qp(SimplexQp::from_dense(Matrix::Zero(2, 2), c), opts);
    CHECK(std::abs(b.solution(0)) <= 1e-12);
    CHECK(std::abs(b.solution(1) - 1.0) <= 1e-12);
    CHECK(b.converged);
  }
}

TEST_CASE("one-dimensional problems are trivial") {
  const QpResult r = solve_simplex_qp(SimplexQp::from_dense(Matrix::Constant(1, 1, 3.0), Vector::Constant(1, -2.0)));
  CHECK(r.solution(0) == 1.0);
  CHECK(r.vi_residual == 0.0);
}

TEST_CASE("non-finite linear terms are rejected") {
  Vector c(2);
  c << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_simplex_qp(SimplexQp::from_dense(Matrix::Identity(2, 2), c)), QpError);
}

TEST_CASE("vi residual") {
  Vector g(3);
  g << 0.3, -1.0, 2.0;
  CHECK(simplex_vi_residual(Vector::Unit(3, 1), g) <= 1e-14);
  CHECK(std::abs(simplex_vi_residual(Vector::Constant(3, 1.0 / 3), Vector::Constant(3, 4.0))) <= 1e-15);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector grad = random_vec(rng, 5, 1.0);
    Vector mu = random_vec(rng, 5, 1.0).cwiseAbs();
    mu /= mu.sum();
    CHECK(simplex_vi_residual(mu, grad) == doctest::Approx(brute_vi(mu, grad)).epsilon(1e-12));
  }
  CHECK_THROWS(simplex_vi_residual(Vector::Zero(2), Vector::Zero(3)));
}

TEST_CASE("active set matches support enumeration and long projected gradient") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(2, 6);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = dim(rng);
    const int rank = std::uniform_int_distribution<int>(0, n)(rng);
    const SimplexQp qp = SimplexQp::from_dense(random_psd(rng, n, rank, 2.0), random_vec(rng, n, 1.0));
    const QpResult r = solve_simplex_qp(qp);
    CHECK(r.converged);
    CHECK(r.vi_residual <= 1e-9);
    CHECK(r.solution.minCoeff() >= 0.0);
    CHECK(std::abs(r.solution.sum() - 1.0) <= 1e-10);
    const double f = qp.objective(r.solution);
    CHECK(f <= qp.objective(oracle::support_enumeration_qp(qp.dense(), qp.linear)) + 1e-8);
    CHECK(f <= qp.objective(oracle::pgd_qp_oracle(qp, 20000)) + 1e-8);
  }
}

TEST_CASE("projected gradient reaches the same optimum on well-conditioned problems") {
  std::mt19937_64 rng(8);
  QpOptions opts;
  opts.method = QpMethod::kProjectedGradient;
  opts.max_iterations = 20000;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 5;
    Matrix q = random_psd(rng, n, n, 1.0) + Matrix::Identity(n, n);
    const SimplexQp qp = SimplexQp::from_dense(q, random_vec(rng, n, 1.0));
    const QpResult r = solve_simplex_qp(qp, opts);
    CHECK(r.vi_residual <= 1e-9);
    CHECK(qp.objective(r.solution) <=
          qp.objective(oracle::support_enumeration_qp(q, qp.linear)) + 1e-8);
  }
}

TEST_CASE("accepted iterates never increase the objective") {
  std::mt19937_64 rng(9);
  for (QpMethod method : {QpMethod::kActiveSet, QpMethod::kProjectedGradient}) {
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 2 + trial % 5;
      const SimplexQp qp = SimplexQp::from_dense(random_psd(rng, n, n - 1, 3.0), random_vec(rng, n, 1.0));
      double last = std::numeric_limits<double>::infinity();
      int violations = 0;
      QpOptions opts;
      opts.method = method;
      opts.observer = [&](const Vector& x) {
        const double f = qp.objective(x);
        if (f > last + 1e-12) ++violations;
        last = f;
      };
      Vector start = random_vec(rng, n, 1.0).cwiseAbs();
      start /= start.sum();
      solve_simplex_qp(qp, opts, &start);
      CHECK(violations == 0);
    }
  }
}

TEST_CASE("warm start at the optimum returns immediately") {
  std::mt19937_64 rng(10);
  const SimplexQp qp = SimplexQp::from_dense(random_psd(rng, 4, 2, 1.0), random_vec(rng, 4, 1.0));
  const QpResult first = solve_simplex_qp(qp);
  const QpResult again = solve_simplex_qp(qp, {}, &first.solution);
  CHECK(again.iterations <= 1);
  CHECK((again.solution - first.solution).norm() <= 1e-12);
}

TEST_CASE("operator and dense forms agree") {
  std::mt19937_64 rng(12);
  const Matrix q = random_psd(rng, 5, 3, 1.0);
  SimplexQp op;
  op.dim = 5;
  op.apply = [&](const Vector& x, Vector& out) { out = q * x; };
  op.linear = random_vec(rng, 5, 1.0);
  CHECK((op.dense() - q).norm() <= 1e-14);
  CHECK(estimate_lipschitz(op, 200) <= q.eigenvalues().real().maxCoeff() * (1 + 1e-9));
  const QpResult a = solve_simplex_qp(op);
  const QpResult b = solve_simplex_qp(SimplexQp::from_dense(q, op.linear));
  CHECK((a.solution - b.solution).norm() <= 1e-12);
}
