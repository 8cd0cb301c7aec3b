#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fvlab/krylov.hpp"

#include <nlohmann/json_fwd.hpp>

namespace fvlab {

enum class TheoremId {
  FixedPoint,
  StopGradContraction,
  ErrorProxy,
  ResidualBounds,
  NormEquivalence,
  Kantorovich,
  SteepestDescent,
  PCGKContraction,
  LocalExpansion,
};

std::string theorem_name(TheoremId id);

/// Per-trial checks are normalized slacks (bound minus value over the trial's
/// natural scale); a check passes when no slack is more negative than the
/// tolerance. `max_violation` records the most negative slack seen.
inline constexpr double kViolationTol = 1e-10;

struct TheoremReport {
  TheoremId id = TheoremId::FixedPoint;
  long trials = 0;
  double max_violation = 0.0;
  bool passed = true;

  void absorb(double slack);
  void merge(const TheoremReport& other);
};

/// F_K(u) = u iff A u = b. Forward direction at the exact solution; reverse
/// direction through the K=1 lower bound (1 - rho)||e||_A on random vectors.
TheoremReport check_fixed_point(const LinearSystem& system, int trials, std::uint64_t seed);

/// Relaxed iteration u+ = (1-eta) u + eta F_K(u): per-step energy-error ratio
/// at most 1 - eta (1 - rho^K).
TheoremReport check_stop_grad_contraction(const LinearSystem& system, double eta, int K, int T,
                                          std::uint64_t seed);

/// (1-rho^K)||e||_A <= ||s_K(u)||_A <= (1+rho^K)||e||_A, plus the residual
/// bounds lambda_min(A)||e||_A <= ||r||_A <= lambda_max(A)||e||_A.
/// Returns {ErrorProxy, ResidualBounds}.
std::vector<TheoremReport> check_error_proxy(const LinearSystem& system, std::span<const int> Ks,
                                             int trials, std::uint64_t seed);

/// ||u - u*||_A equals ||M^{1/2}(u - u*)||_C via explicit diagonal square
/// roots, to 1e-12 relative.
TheoremReport check_norm_equivalence(const LinearSystem& system, int trials, std::uint64_t seed);

/// (x'Cx)(x'C^{-1}x) <= ((kappa+1)^2 / 4 kappa) (x'x)^2 on random SPD matrices.
TheoremReport check_kantorovich(int matrices, int vectors_per_matrix, int max_size,
                                std::uint64_t seed);

/// One exact-line-search steepest-descent step contracts the C-norm error by
/// at least rho.
TheoremReport check_steepest_descent(int pairs, int max_size, std::uint64_t seed);

/// ||F_K(u) - u*||_A <= rho^K ||u - u*||_A, plus monotonicity of the energy
/// error in K.
TheoremReport check_pcgk_contraction(const LinearSystem& system, std::span<const int> Ks,
                                     int trials, std::uint64_t seed);

/// Linear Richardson surrogate F(u) = u - omega M^{-1}(A u - b), whose
/// Jacobian J = I - omega M^{-1} A is closed-form. Verifies that measured
/// asymptotic rates of the stop-gradient and full-gradient dynamics match the
/// spectral radii of (1-eta) I + eta J and I - eta (I-J)'(I-J) within 1%, and
/// that shrinking ||I-J|| leaves the full-gradient dynamics the slower one.
/// Throws UnstableDynamics if the iterates diverge.
TheoremReport check_local_expansion(double omega, const LinearSystem& system, double eta,
                                    int trials, Precond precond = Precond::Jacobi);

/// Boundary assignment for the paper-style regimes "dirichlet" (zero value),
/// "neumann" (zero flux) and "random" (patch-wise coin flips, re-drawn until
/// at least one Dirichlet patch exists).
BoundarySpec regime_boundary(const Mesh& mesh, const std::string& regime, std::uint64_t seed);

struct BatteryConfig {
  int resolution = 32;
  int seeds_per_category = 5;
  int random_vectors = 20;
  std::vector<int> Ks{1, 5, 20, 40};
  std::vector<double> stopgrad_etas{0.25, 0.5, 1.0};
  std::vector<int> stopgrad_Ks{1, 5};
  int stopgrad_T = 50;
  int threads = 1;
  std::uint64_t base_seed = 2024;

  static BatteryConfig preset(const std::string& name);  // "default" or "quick"
};

struct BatteryResult {
  std::vector<TheoremReport> reports;  // one per TheoremId
  double wall_seconds = 0.0;
  bool all_passed = false;
};

/// Runs every theorem check over corner-removed-square systems (all five
/// categories, three BC regimes) plus the synthetic dense batteries.
BatteryResult run_battery(const BatteryConfig& config);

nlohmann::json battery_to_json(const BatteryResult& result);

/// rho for contraction bounds: exact dense extremes on small systems, Lanczos
/// with 1% condition-number inflation on large ones.
double rho_for_bounds(const LinearSystem& system, Precond precond = Precond::Jacobi);

/// Exact solve used as the reference u* in theorem checks (sparse Cholesky).
Eigen::VectorXd reference_solution(const LinearSystem& system);

}  // namespace fvlab
