#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "fvlab/fields.hpp"
#include "fvlab/krylov.hpp"
#include "fvlab/rng.hpp"
#include "fvlab/theory.hpp"

using namespace fvlab;

namespace {

const double L = kDefaultDomainLength;

LinearSystem diag_system(std::initializer_list<double> diag, std::initializer_list<double> rhs) {
  LinearSystem sys;
  const int n = static_cast<int>(diag.size());
  sys.matrix.resize(n, n);
  std::vector<Eigen::Triplet<double>> t;
  int i = 0;
  for (double d : diag) t.emplace_back(i, i, d), ++i;
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.rhs = Eigen::VectorXd(n);
  i = 0;
  for (double b : rhs) sys.rhs(i++) = b;
  return sys;
}

LinearSystem dirichlet_system(int category, int resolution, std::uint64_t seed) {
  const Mesh m = build_mesh(sample_corner_removed_square(category, seed, L, resolution));
  const Eigen::VectorXd f = sample_trig_forcing(m, TrigForcingConfig{}, seed);
  return assemble(m, BoundarySpec::all_dirichlet(m, 0.0), f);
}

Eigen::VectorXd random_vec(int n, std::uint64_t seed) {
  rng::Stream st(seed, "test_vec");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = st.normal();
  return v;
}

}  // namespace

TEST_CASE("Jacobi preconditioning solves a diagonal system in one step") {
  const LinearSystem sys = diag_system({2.0, 3.0}, {2.0, 3.0});
  const auto [u, trace] = pcg_solve(sys, Eigen::VectorXd::Zero(2));
  CHECK(trace.iterations_used == 1);
  CHECK(trace.converged);
  CHECK(u(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(u(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("starting at the solution performs no updates") {
  const LinearSystem sys = diag_system({2.0, 3.0}, {2.0, 3.0});
  Eigen::VectorXd ustar(2);
  ustar << 1.0, 1.0;
  const auto [u, trace] = pcg_solve(sys, ustar);
  CHECK(trace.iterations_used == 0);
  CHECK(trace.converged);
  CHECK(u == ustar);
  CHECK(f_k(sys, ustar, 7) == ustar);
}

TEST_CASE("indefinite matrices are detected") {
  LinearSystem sys;
  sys.matrix.resize(2, 2);
  std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {1, 1, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}};
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.rhs = Eigen::VectorXd(2);
  sys.rhs << 1.0, -1.0;
  CHECK_THROWS_AS(pcg_solve(sys, Eigen::VectorXd::Zero(2)), NotSPDDetected);
}

TEST_CASE("f_k single step on the diagonal example") {
  const LinearSystem sys = diag_system({2.0, 3.0}, {2.0, 3.0});
  const Eigen::VectorXd u1 = f_k(sys, Eigen::VectorXd::Zero(2), 1);
  CHECK(u1(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(u1(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("away from the solution every truncation moves the iterate") {
  const LinearSystem sys = dirichlet_system(2, 8, 3);
  const Eigen::VectorXd u = random_vec(sys.size(), 1);
  for (int K = 1; K <= 5; ++K)
    CHECK(self_consistency_residual(sys, u, K).norm() > 0.0);
}

TEST_CASE("large K drives s_K to the true error") {
  const LinearSystem sys = dirichlet_system(0, 8, 2);
  const Eigen::VectorXd ustar = reference_solution(sys);
  const Eigen::VectorXd u = random_vec(sys.size(), 5);
  const Eigen::VectorXd s = self_consistency_residual(sys, u, 500);
  CHECK((s - (u - ustar)).norm() <= 1e-8 * (u - ustar).norm());
}

TEST_CASE("energy norm values and spectral envelope") {
  const LinearSystem sys = diag_system({2.0, 3.0}, {0.0, 0.0});
  CHECK(energy_norm(sys, Eigen::VectorXd::Zero(2)) == 0.0);
  Eigen::VectorXd ones(2);
  ones << 1.0, 1.0;
  CHECK(energy_norm(sys, ones) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));

  const LinearSystem mesh_sys = dirichlet_system(1, 8, 4);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(mesh_sys.matrix),
                                                    Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(es.eigenvalues().size() - 1);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Eigen::VectorXd x = random_vec(mesh_sys.size(), 100 + s);
    const double e2 = std::pow(energy_norm(mesh_sys, x), 2);
    CHECK(e2 >= lo * x.squaredNorm() * (1.0 - 1e-12));
    CHECK(e2 <= hi * x.squaredNorm() * (1.0 + 1e-12));
  }
}

TEST_CASE("negative quadratic forms are flagged") {
  LinearSystem sys;
  sys.matrix.resize(2, 2);
  std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {1, 1, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}};
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.rhs = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd x(2);
  x << 1.0, -1.0;  // x'Ax = 2 - 4 = -2
  CHECK_THROWS_AS(energy_norm(sys, x), NegativeQuadraticForm);
}

TEST_CASE("spectral estimates on closed-form cases") {
  const LinearSystem diag = diag_system({2.0, 3.0, 7.0}, {1.0, 1.0, 1.0});
  const SpectralEstimate jac = estimate_spectrum(diag, 50, Precond::Jacobi);
  CHECK(jac.kappa == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(jac.rho == doctest::Approx(0.0).epsilon(1e-10));

  const LinearSystem d13 = diag_system({1.0, 3.0}, {1.0, 1.0});
  const SpectralEstimate ident = estimate_spectrum(d13, 50, Precond::Identity);
  CHECK(ident.kappa == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(ident.rho == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("spectral estimate matches a dense eigensolve") {
  for (int resolution : {12, 32}) {
    const LinearSystem sys = dirichlet_system(0, resolution, 1);
    const SpectralEstimate est = estimate_spectrum(sys, 400);
    const Eigen::VectorXd dsi =
        Eigen::VectorXd(sys.matrix.diagonal()).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd C =
        dsi.asDiagonal() * Eigen::MatrixXd(sys.matrix) * dsi.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(es.eigenvalues().size() - 1);
    CHECK(std::abs(est.lambda_min - lo) <= 0.01 * lo);
    CHECK(std::abs(est.lambda_max - hi) <= 0.01 * hi);
    CHECK(std::abs(est.kappa - hi / lo) <= 0.01 * hi / lo);
  }
}

TEST_CASE("too small a Lanczos budget reports no convergence") {
  const LinearSystem sys = dirichlet_system(0, 32, 1);
  CHECK_THROWS_AS(estimate_spectrum(sys, 3), NoConvergence);
}

TEST_CASE("PCG-K contraction and monotone energy error") {
  const LinearSystem sys = dirichlet_system(3, 8, 6);
  const Eigen::VectorXd ustar = reference_solution(sys);
  const double rho = rho_for_bounds(sys);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Eigen::VectorXd u = random_vec(sys.size(), 200 + s);
    const double en = energy_norm(sys, u - ustar);
    double prev = en;
    for (int K = 1; K <= 12; ++K) {
      const double fe = energy_norm(sys, f_k(sys, u, K) - ustar);
      CHECK(fe <= std::pow(rho, K) * en * (1.0 + 1e-10));
      CHECK(fe <= prev + 1e-10 * en);
      prev = fe;
    }
  }
}

TEST_CASE("fixed points of F_K are exactly the solutions") {
  const LinearSystem sys = dirichlet_system(1, 8, 9);
  const Eigen::VectorXd ustar = reference_solution(sys);
  // forward: residual zero -> no movement
  CHECK(self_consistency_residual(sys, ustar, 3).norm() <= 1e-10 * ustar.norm());
  // reverse: nonzero residual -> movement at K = 1
  Eigen::VectorXd u = ustar;
  u(0) += 1e-3;
  CHECK((sys.matrix * u - sys.rhs).norm() > 0.0);
  CHECK(self_consistency_residual(sys, u, 1).norm() > 0.0);
}

TEST_CASE("PCG converges within budget on a mid-size Dirichlet system") {
  const LinearSystem sys = dirichlet_system(4, 64, 7);
  PCGConfig cfg;  // defaults: tol 1e-8, 3000 iterations
  const auto [u, trace] = pcg_solve(sys, Eigen::VectorXd::Zero(sys.size()), cfg);
  CHECK(trace.converged);
  CHECK(trace.iterations_used <= 3000);
  CHECK(trace.residual_norms.back() <= 1e-8);
}

TEST_CASE("solve trace records energy errors against a reference") {
  const LinearSystem sys = dirichlet_system(0, 8, 3);
  const Eigen::VectorXd ustar = reference_solution(sys);
  PCGConfig cfg;
  cfg.abs_tol = 1e-12;
  cfg.max_iters = 500;
  cfg.energy_ref = &ustar;
  const auto [u, trace] = pcg_solve(sys, Eigen::VectorXd::Zero(sys.size()), cfg);
  REQUIRE(trace.energy_errors.size() == trace.residual_norms.size());
  CHECK(trace.energy_errors.front() > trace.energy_errors.back());
  // monotone in the energy norm (CG optimality)
  for (std::size_t i = 1; i < trace.energy_errors.size(); ++i)
    CHECK(trace.energy_errors[i] <= trace.energy_errors[i - 1] * (1.0 + 1e-12) + 1e-300);
}
