#include <cmath>
#include <numbers>

#include "doctest.h"
#include "haps/conic.hpp"

using namespace haps::conic;

namespace {

SolveResult run(const ConicProgram& p) {
  SolveOptions opts;
  opts.tol = 1e-9;
  return solve(p, opts);
}

}  // namespace

TEST_CASE("bounded linear program") {
  // max x + 2y s.t. x <= 3, y <= 1, x >= 0, y >= 0.
  ConicProgram p;
  p.add_reals(2);
  Affine obj = p.affine(0.0);
  obj.coeff << 1.0, 2.0;
  p.set_linear_objective(obj);
  for (int i = 0; i < 2; ++i) {
    Affine lo = p.affine(0.0);
    lo.coeff[i] = 1.0;
    p.add_ineq(lo);
    Affine hi = p.affine(i == 0 ? 3.0 : 1.0);
    hi.coeff[i] = -1.0;
    p.add_ineq(hi);
  }
  const SolveResult r = run(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.value == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(r.v[0] == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(r.v[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("log objective saturates its cap") {
  // max log2(x) s.t. x <= 8.
  ConicProgram p;
  p.add_reals(1);
  Affine x = p.affine(0.0);
  x.coeff[0] = 1.0;
  p.add_log2_term(1.0, x);
  Affine cap = p.affine(8.0);
  cap.coeff[0] = -1.0;
  p.add_ineq(cap);
  const SolveResult r = run(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.value == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("water-filling across two log terms") {
  // max log2(1+x) + log2(1+3y) s.t. x + y <= 2, x,y >= 0.
  // Equal marginals 1/(1+x) = 3/(1+3y) with a tight budget give x = 2/3, y = 4/3.
  ConicProgram p;
  p.add_reals(2);
  Affine ax = p.affine(1.0);
  ax.coeff[0] = 1.0;
  p.add_log2_term(1.0, ax);
  Affine ay = p.affine(1.0);
  ay.coeff[1] = 3.0;
  p.add_log2_term(1.0, ay);
  Affine budget = p.affine(2.0);
  budget.coeff << -1.0, -1.0;
  p.add_ineq(budget);
  for (int i = 0; i < 2; ++i) {
    Affine lo = p.affine(0.0);
    lo.coeff[i] = 1.0;
    p.add_ineq(lo);
  }
  const SolveResult r = run(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.v[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-4));
  CHECK(r.v[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("psd block: maximal eigenvalue via trace objective") {
  // max tr(C X) s.t. tr(X) <= 1, X psd  ->  lambda_max(C).
  Eigen::MatrixXcd c(2, 2);
  c << 2.0, std::complex<double>(1.0, 1.0), std::complex<double>(1.0, -1.0),
      3.0;
  ConicProgram p;
  const int blk = p.add_psd_block(2, BlockKind::hermitian);
  Affine obj = p.affine(0.0);
  p.add_trace_term(obj, blk, c);
  p.set_linear_objective(obj);
  Affine cap = p.affine(1.0);
  p.add_trace_term(cap, blk, Eigen::MatrixXcd::Identity(2, 2), -1.0);
  p.add_ineq(cap);
  const SolveResult r = run(p);
  REQUIRE(r.status == SolveStatus::optimal);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c);
  CHECK(r.value == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-6));
  // The block value is PSD.
  const Eigen::MatrixXcd x = p.block_value(0, r.v);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ex(x);
  CHECK(ex.eigenvalues().minCoeff() > -1e-8);
}

TEST_CASE("hermitian block agrees with its real symmetric embedding") {
  // Same eigenvalue problem posed over the real embedding [Re -Im; Im Re]
  // must reach the same optimum (scaled by the doubled trace).
  Eigen::MatrixXcd c(2, 2);
  c << 1.0, std::complex<double>(0.5, -2.0), std::complex<double>(0.5, 2.0),
      -1.0;
  const auto solve_hermitian = [&]() {
    ConicProgram p;
    const int blk = p.add_psd_block(2, BlockKind::hermitian);
    Affine obj = p.affine(0.0);
    p.add_trace_term(obj, blk, c);
    p.set_linear_objective(obj);
    Affine cap = p.affine(1.0);
    p.add_trace_term(cap, blk, Eigen::MatrixXcd::Identity(2, 2), -1.0);
    p.add_ineq(cap);
    return run(p).value;
  };
  const auto solve_embedded = [&]() {
    Eigen::MatrixXd e(4, 4);
    e.topLeftCorner(2, 2) = c.real();
    e.bottomRightCorner(2, 2) = c.real();
    e.topRightCorner(2, 2) = -c.imag();
    e.bottomLeftCorner(2, 2) = c.imag();
    ConicProgram p;
    const int blk = p.add_psd_block(4, BlockKind::real_symmetric);
    Affine obj = p.affine(0.0);
    p.add_trace_term(obj, blk, e.cast<std::complex<double>>(), 0.5);
    p.set_linear_objective(obj);
    Affine cap = p.affine(1.0);
    p.add_trace_term(cap, blk, Eigen::MatrixXcd::Identity(4, 4), -0.5);
    p.add_ineq(cap);
    return run(p).value;
  };
  CHECK(solve_hermitian() == doctest::Approx(solve_embedded()).epsilon(1e-5));
}

TEST_CASE("second-order cone constraint") {
  // max x + y s.t. ||(x, y)|| <= 5  ->  5 sqrt(2) at x = y.
  ConicProgram p;
  p.add_reals(2);
  Affine obj = p.affine(0.0);
  obj.coeff << 1.0, 1.0;
  p.set_linear_objective(obj);
  ConicProgram::Soc soc;
  for (int i = 0; i < 2; ++i) {
    Affine a = p.affine(0.0);
    a.coeff[i] = 1.0;
    soc.u.push_back(a);
  }
  soc.rhs = p.affine(5.0);
  p.add_soc(soc);
  const SolveResult r = run(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.value == doctest::Approx(5.0 * std::sqrt(2.0)).epsilon(1e-5));
}

TEST_CASE("convex quadratic constraint") {
  // max x s.t. x^2 + x - 6 <= 0  ->  x = 2.
  ConicProgram p;
  p.add_reals(1);
  Affine obj = p.affine(0.0);
  obj.coeff[0] = 1.0;
  p.set_linear_objective(obj);
  ConicProgram::Quad q;
  q.p_mat = Eigen::MatrixXd::Identity(1, 1);
  q.p_vec = Eigen::VectorXd::Ones(1);
  q.constant = -6.0;
  p.add_quad(q);
  const SolveResult r = run(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.v[0] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("infeasible linear constraints are reported") {
  // x >= 1 and x <= 0.
  ConicProgram p;
  p.add_reals(1);
  Affine obj = p.affine(0.0);
  obj.coeff[0] = 1.0;
  p.set_linear_objective(obj);
  Affine lo = p.affine(-1.0);
  lo.coeff[0] = 1.0;
  p.add_ineq(lo);
  Affine hi = p.affine(0.0);
  hi.coeff[0] = -1.0;
  p.add_ineq(hi);
  CHECK(run(p).status == SolveStatus::infeasible);
}

TEST_CASE("phase one recovers from an exterior warm start") {
  // Feasible set 2 <= x <= 3; hint far outside.
  ConicProgram p;
  p.add_reals(1);
  Affine obj = p.affine(0.0);
  obj.coeff[0] = -1.0;  // minimize x
  p.set_linear_objective(obj);
  Affine lo = p.affine(-2.0);
  lo.coeff[0] = 1.0;
  p.add_ineq(lo);
  Affine hi = p.affine(3.0);
  hi.coeff[0] = -1.0;
  p.add_ineq(hi);
  SolveOptions opts;
  opts.tol = 1e-9;
  opts.initial = Eigen::VectorXd::Constant(1, -50.0);
  const SolveResult r = solve(p, opts);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.v[0] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("feasibility margin helper") {
  ConicProgram p;
  p.add_reals(1);
  Affine lo = p.affine(0.0);
  lo.coeff[0] = 1.0;
  p.add_ineq(lo);
  Eigen::VectorXd good(1), bad(1);
  good << 2.0;
  bad << -3.0;
  CHECK(p.worst_margin(good) == doctest::Approx(2.0));
  CHECK(p.worst_margin(bad) == doctest::Approx(-3.0));
}
