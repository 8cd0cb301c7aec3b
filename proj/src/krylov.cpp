#include "fvlab/krylov.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace fvlab {

namespace {

Eigen::VectorXd preconditioner_diagonal(const LinearSystem& sys, Precond pc) {
  if (pc == Precond::Identity) return Eigen::VectorXd::Ones(sys.size());
  Eigen::VectorXd d = sys.matrix.diagonal();
  if ((d.array() <= 0.0).any())
    throw NotSPDDetected("matrix diagonal has a non-positive entry");
  return d;
}

// Shared engine behind pcg_solve and f_k. `abs_tol < 0` disables the
// tolerance exit; the zero-residual floor always applies.
void pcg_iterate(const LinearSystem& sys, Eigen::VectorXd& u, int max_steps, double abs_tol,
                 Precond pc, SolveTrace& trace, bool record_iterates,
                 const Eigen::VectorXd* energy_ref) {
  const SpMat& A = sys.matrix;
  const Eigen::VectorXd& b = sys.rhs;
  const Eigen::VectorXd d = preconditioner_diagonal(sys, pc);
  const double zero_floor = 1e-15 * b.norm();

  auto note = [&](const Eigen::VectorXd& uk) {
    if (record_iterates) trace.iterates.push_back(uk);
    if (energy_ref) trace.energy_errors.push_back(energy_norm(sys, uk - *energy_ref));
  };

  Eigen::VectorXd r = b - A * u;
  double rn = r.norm();
  trace.residual_norms.push_back(rn);
  note(u);
  trace.converged = abs_tol >= 0.0 && rn <= abs_tol;
  if (rn <= zero_floor || trace.converged) {
    trace.converged = trace.converged || rn <= zero_floor;
    return;
  }

  Eigen::VectorXd z = r.cwiseQuotient(d);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  Eigen::VectorXd Ap(u.size());

  for (int k = 0; k < max_steps; ++k) {
    Ap.noalias() = A * p;
    const double pAp = p.dot(Ap);
    if (pAp <= 0.0) throw NotSPDDetected("p'Ap <= 0 during PCG");
    const double alpha = rz / pAp;
    u += alpha * p;
    r -= alpha * Ap;
    rn = r.norm();
    trace.residual_norms.push_back(rn);
    trace.iterations_used = k + 1;
    note(u);
    if (abs_tol >= 0.0 && rn <= abs_tol) {
      trace.converged = true;
      return;
    }
    if (rn <= zero_floor) {
      trace.converged = true;
      return;
    }
    z = r.cwiseQuotient(d);
    const double rz_next = r.dot(z);
    const double beta = rz_next / rz;
    p = z + beta * p;
    rz = rz_next;
  }
}

}  // namespace

std::pair<Eigen::VectorXd, SolveTrace> pcg_solve(const LinearSystem& sys,
                                                 const Eigen::VectorXd& u0,
                                                 const PCGConfig& config) {
  if (u0.size() != sys.size()) throw InvalidArgument("u0 length does not match system size");
  if (config.max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (!(config.abs_tol > 0.0)) throw InvalidArgument("abs_tol must be positive");
  if (config.K && *config.K < 1) throw InvalidArgument("K must be >= 1");

  const int budget = config.K ? std::min(*config.K, config.max_iters) : config.max_iters;
  Eigen::VectorXd u = u0;
  SolveTrace trace;
  pcg_iterate(sys, u, budget, config.abs_tol, config.precond, trace, config.record_iterates,
              config.energy_ref);
  return {std::move(u), std::move(trace)};
}

Eigen::VectorXd f_k(const LinearSystem& sys, const Eigen::VectorXd& u, int K, Precond pc) {
  if (K < 1) throw InvalidArgument("K must be >= 1");
  if (u.size() != sys.size()) throw InvalidArgument("u length does not match system size");
  Eigen::VectorXd v = u;
  SolveTrace trace;
  pcg_iterate(sys, v, K, /*abs_tol=*/-1.0, pc, trace, false, nullptr);
  return v;
}

Eigen::VectorXd self_consistency_residual(const LinearSystem& sys, const Eigen::VectorXd& u,
                                          int K, Precond pc) {
  return u - f_k(sys, u, K, pc);
}

double energy_norm(const LinearSystem& sys, const Eigen::VectorXd& x) {
  if (x.size() != sys.size()) throw InvalidArgument("vector length does not match system size");
  const double q = x.dot(sys.matrix * x);
  if (q < 0.0) {
    double max_diag = 0.0;
    for (int i = 0; i < sys.size(); ++i)
      max_diag = std::max(max_diag, std::abs(sys.matrix.coeff(i, i)));
    if (q < -1e-12 * max_diag * x.squaredNorm())
      throw NegativeQuadraticForm("x'Ax < 0: matrix is not SPD");
    return 0.0;
  }
  return std::sqrt(q);
}

namespace {

struct LanczosResult {
  double min = 0.0, max = 0.0;
  bool exact = false;       // Krylov space exhausted
  bool stabilized = false;  // extremes stopped moving
};

LanczosResult lanczos_extremes(const LinearSystem& sys, int iters, Precond pc) {
  const int n = sys.size();
  const Eigen::VectorXd d = preconditioner_diagonal(sys, pc);
  const Eigen::VectorXd dsqrt_inv = d.cwiseSqrt().cwiseInverse();
  const int pin = sys.pinned_cell;

  auto apply_C = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y = dsqrt_inv.cwiseProduct(x);
    y = sys.matrix * y;
    y = dsqrt_inv.cwiseProduct(y);
    if (pin >= 0) y(pin) = 0.0;  // deflate the trivial pinned eigenvalue
    return y;
  };

  const int n_eff = pin >= 0 ? n - 1 : n;
  const int m_max = std::min(iters, n_eff);

  // Deterministic pseudo-random start vector, orthogonal to the pinned axis.
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = std::sin(0.7 * i + 1.3) + 0.01;
  if (pin >= 0) v(pin) = 0.0;
  v.normalize();

  std::vector<Eigen::VectorXd> basis;
  std::vector<double> alpha, beta;  // tridiagonal entries
  basis.push_back(v);

  LanczosResult res;
  double prev_min = 0.0, prev_max = 0.0;
  int stable_steps = 0;

  for (int j = 0; j < m_max; ++j) {
    Eigen::VectorXd w = apply_C(basis[j]);
    const double a = basis[j].dot(w);
    alpha.push_back(a);
    w -= a * basis[j];
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    for (const Eigen::VectorXd& q : basis) w -= q.dot(w) * q;  // full reorthogonalization
    const double bnorm = w.norm();

    // Ritz extremes of the current tridiagonal section.
    const int m = j + 1;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) T(i, i) = alpha[i];
    for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
    res.min = es.eigenvalues()(0);
    res.max = es.eigenvalues()(m - 1);

    if (m > 1) {
      const double dmin = std::abs(res.min - prev_min) / std::max(std::abs(res.min), 1e-300);
      const double dmax = std::abs(res.max - prev_max) / std::max(std::abs(res.max), 1e-300);
      stable_steps = (dmin < 1e-9 && dmax < 1e-9) ? stable_steps + 1 : 0;
    }
    prev_min = res.min;
    prev_max = res.max;

    if (bnorm <= 1e-13 * std::max(std::abs(a), 1.0) || m == n_eff) {
      res.exact = true;
      res.stabilized = true;
      return res;
    }
    if (stable_steps >= 4) {
      res.stabilized = true;
      return res;
    }
    beta.push_back(bnorm);
    basis.push_back(w / bnorm);
  }
  return res;
}

}  // namespace

SpectralEstimate estimate_spectrum(const LinearSystem& sys, int iters, Precond pc) {
  if (iters < 2) throw InvalidArgument("iters must be >= 2");
  const LanczosResult lr = lanczos_extremes(sys, iters, pc);
  if (!lr.stabilized)
    throw NoConvergence("Ritz extremes did not stabilize within the iteration budget");
  if (!(lr.min > 0.0)) throw NotSPDDetected("estimated lambda_min <= 0");
  SpectralEstimate est;
  est.lambda_min = lr.min;
  est.lambda_max = lr.max;
  est.kappa = lr.max / lr.min;
  est.rho = (est.kappa - 1.0) / (est.kappa + 1.0);
  return est;
}

double estimate_lambda_max(const LinearSystem& sys, Precond pc, int iters) {
  const LanczosResult lr = lanczos_extremes(sys, std::max(iters, 2), pc);
  return lr.max * 1.01;  // Ritz values underestimate; inflate for a safe bound
}

}  // namespace fvlab
