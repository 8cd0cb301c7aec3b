#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <nlohmann/json.hpp>

#include "fvlab/fields.hpp"
#include "fvlab/theory.hpp"

using namespace fvlab;

namespace {

const double L = kDefaultDomainLength;

LinearSystem small_system(const std::string& regime, int resolution = 8, int category = 2,
                          std::uint64_t seed = 3) {
  const Mesh m = build_mesh(sample_corner_removed_square(category, seed, L, resolution));
  const Eigen::VectorXd f = sample_trig_forcing(m, TrigForcingConfig{}, seed);
  return assemble(m, regime_boundary(m, regime, seed), f);
}

LinearSystem diag_system(std::initializer_list<double> diag) {
  LinearSystem sys;
  const int n = static_cast<int>(diag.size());
  sys.matrix.resize(n, n);
  std::vector<Eigen::Triplet<double>> t;
  int i = 0;
  for (double d : diag) t.emplace_back(i, i, d), ++i;
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.rhs = Eigen::VectorXd::Ones(n);
  return sys;
}

}  // namespace

TEST_CASE("fixed-point check passes on assembled systems") {
  for (const char* regime : {"dirichlet", "neumann", "random"}) {
    const TheoremReport r = check_fixed_point(small_system(regime), 20, 5);
    CHECK(r.passed);
    CHECK(r.trials > 0);
    CHECK(r.max_violation >= -kViolationTol);
  }
}

TEST_CASE("stop-gradient contraction holds across eta and K") {
  const LinearSystem sys = small_system("dirichlet");
  for (double eta : {0.25, 0.5, 1.0})
    for (int K : {1, 5}) {
      const TheoremReport r = check_stop_grad_contraction(sys, eta, K, 50, 7);
      CHECK(r.passed);
    }
  CHECK_THROWS_AS(check_stop_grad_contraction(sys, 1.5, 1, 10, 7), InvalidArgument);
}

TEST_CASE("steepest-descent bound on the identity-preconditioned diagonal pair") {
  // kappa = 3 so one relaxed step with eta = 1, K = 1 contracts by rho = 0.5
  const LinearSystem sys = diag_system({1.0, 3.0});
  const Eigen::VectorXd ustar = reference_solution(sys);
  Eigen::VectorXd u(2);
  u << 2.0, 0.5;
  const Eigen::VectorXd u1 = f_k(sys, u, 1, Precond::Identity);
  const double ratio = energy_norm(sys, u1 - ustar) / energy_norm(sys, u - ustar);
  CHECK(ratio <= 0.5 + 1e-12);
}

TEST_CASE("error proxy and residual bounds hold per trial") {
  const std::vector<int> Ks{1, 5, 20, 40};
  for (const char* regime : {"dirichlet", "neumann", "random"}) {
    const auto reports = check_error_proxy(small_system(regime), Ks, 20, 11);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].id == TheoremId::ErrorProxy);
    CHECK(reports[1].id == TheoremId::ResidualBounds);
    CHECK(reports[0].passed);
    CHECK(reports[1].passed);
  }
}

TEST_CASE("huge K collapses the proxy bounds to equality") {
  const LinearSystem sys = small_system("dirichlet", 6, 0, 1);
  const Eigen::VectorXd ustar = reference_solution(sys);
  Eigen::VectorXd u = ustar;
  u(0) += 1.0;
  u(1) -= 0.5;
  const double en = energy_norm(sys, u - ustar);
  const double sn = energy_norm(sys, self_consistency_residual(sys, u, 2000));
  CHECK(sn == doctest::Approx(en).epsilon(1e-8));
}

TEST_CASE("norm equivalence at machine precision") {
  for (const char* regime : {"dirichlet", "neumann"}) {
    const TheoremReport r = check_norm_equivalence(small_system(regime), 20, 3);
    CHECK(r.passed);
  }
}

TEST_CASE("Kantorovich and steepest-descent batteries") {
  const TheoremReport k = check_kantorovich(50, 20, 50, 9);
  CHECK(k.passed);
  CHECK(k.trials == 1000);
  const TheoremReport s = check_steepest_descent(1000, 50, 10);
  CHECK(s.passed);
  CHECK(s.trials == 1000);
}

TEST_CASE("PCG-K contraction over the battery Ks") {
  const std::vector<int> Ks{1, 5, 20, 40};
  const TheoremReport r = check_pcgk_contraction(small_system("random"), Ks, 20, 13);
  CHECK(r.passed);
}

TEST_CASE("local expansion rates on closed-form cases") {
  // J = 0: both dynamics contract at exactly 1 - eta
  const TheoremReport j0 = check_local_expansion(1.0, diag_system({2.0, 5.0}), 0.5, 1);
  CHECK(j0.passed);

  // J near identity: slow-mode rates 1 - 0.1 eta (stop) vs 1 - 0.01 eta (full)
  const TheoremReport near = check_local_expansion(0.1, diag_system({1.0, 3.0}), 1.0, 1,
                                                   Precond::Identity);
  CHECK(near.passed);

  // 16-cell assembled system against dense eigen-predictions
  const Mesh m = build_mesh(sample_corner_removed_square(0, 1, L, 4));
  const Eigen::VectorXd f = sample_trig_forcing(m, TrigForcingConfig{}, 2);
  const LinearSystem cells16 = assemble(m, BoundarySpec::all_dirichlet(m, 0.0), f);
  const double lam_max = estimate_spectrum(cells16, 50).lambda_max;
  for (double eta : {0.5, 1.0})
    CHECK(check_local_expansion(0.9 / lam_max, cells16, eta, 2).passed);
}

TEST_CASE("divergent dynamics raise UnstableDynamics") {
  // eta omega lambda far above 2 blows up the full-gradient iteration
  const LinearSystem sys = diag_system({1.0, 3.0});
  CHECK_THROWS_AS(check_local_expansion(5.0, sys, 1.0, 1, Precond::Identity),
                  UnstableDynamics);
}

TEST_CASE("quick battery passes end to end") {
  BatteryConfig cfg = BatteryConfig::preset("quick");
  cfg.threads = 2;
  const BatteryResult result = run_battery(cfg);
  CHECK(result.all_passed);
  REQUIRE(result.reports.size() == 9);
  for (const TheoremReport& r : result.reports) {
    CHECK(r.passed);
    CHECK(r.trials > 0);
  }
  const nlohmann::json j = battery_to_json(result);
  CHECK(j.at("all_passed").get<bool>());
  CHECK(j.at("reports").size() == 9);
}

TEST_CASE("battery presets reject unknown names") {
  CHECK_THROWS_AS(BatteryConfig::preset("nope"), InvalidArgument);
}
