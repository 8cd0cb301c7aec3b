#pragma once

#include <Eigen/Core>
#include <optional>
#include <utility>
#include <vector>

#include "fvlab/assembly.hpp"

namespace fvlab {

enum class Precond { Jacobi, Identity };

struct PCGConfig {
  int max_iters = 3000;
  double abs_tol = 1e-8;
  std::optional<int> K;  // truncation count; caps the step budget when present
  Precond precond = Precond::Jacobi;
  bool record_iterates = false;
  const Eigen::VectorXd* energy_ref = nullptr;  // if set, trace energy errors vs this vector
};

struct SolveTrace {
  std::vector<Eigen::VectorXd> iterates;  // filled only when requested
  std::vector<double> residual_norms;     // ||r_k||_2, starting at k = 0
  std::vector<double> energy_errors;      // ||u_k - ref||_A when energy_ref given
  int iterations_used = 0;
  bool converged = false;
};

/// Extremal spectrum of the symmetrically preconditioned operator
/// C = M^{-1/2} A M^{-1/2} and the derived contraction factor.
struct SpectralEstimate {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 1.0;              // lambda_max / lambda_min
  double rho = 0.0;                // (kappa - 1) / (kappa + 1)
};

/// Jacobi-preconditioned conjugate gradients. Recurrences:
///   r0 = b - A u0, z0 = M^{-1} r0, p0 = z0,
///   alpha_k = (r.z)/(p.Ap), u += alpha p, r -= alpha Ap,
///   beta_k = (r+.z+)/(r.z), p = z+ + beta p.
/// Stops at ||r||_2 <= abs_tol or the iteration budget. An exactly zero
/// initial residual (operationally ||r|| <= 1e-15 ||b||) returns u0 unchanged.
std::pair<Eigen::VectorXd, SolveTrace> pcg_solve(const LinearSystem& system,
                                                 const Eigen::VectorXd& u0,
                                                 const PCGConfig& config = {});

/// The K-step PCG update operator F_K: exactly min(K, steps-until-zero-residual)
/// steps from u, with no tolerance-based early exit.
Eigen::VectorXd f_k(const LinearSystem& system, const Eigen::VectorXd& u, int K,
                    Precond precond = Precond::Jacobi);

/// s_K(u) = u - F_K(u); zero exactly at solutions of A u = b.
Eigen::VectorXd self_consistency_residual(const LinearSystem& system, const Eigen::VectorXd& u,
                                          int K, Precond precond = Precond::Jacobi);

/// sqrt(x' A x); throws NegativeQuadraticForm on a clearly indefinite input.
double energy_norm(const LinearSystem& system, const Eigen::VectorXd& x);

/// Lanczos (full reorthogonalization) estimate of the extremal eigenvalues of
/// C. The pinned coordinate, an exact eigenvector with eigenvalue one, is
/// deflated. Throws NoConvergence if the Ritz extremes fail to stabilize.
SpectralEstimate estimate_spectrum(const LinearSystem& system, int iters = 400,
                                   Precond precond = Precond::Jacobi);

/// Cheap upper estimate of lambda_max(C) (inflated Lanczos extreme); used to
/// pick Richardson step sizes.
double estimate_lambda_max(const LinearSystem& system, Precond precond = Precond::Jacobi,
                           int iters = 100);

}  // namespace fvlab
