#include "fvlab/control.hpp"

#include <cmath>

#include "fvlab/krylov.hpp"

namespace fvlab {

ControlProblem make_control_problem(const GeometrySpec& plate, std::uint64_t forcing_seed,
                                    double u_m, double alpha) {
  if (plate.family != GeometryFamily::PerforatedPlate)
    throw InvalidArgument("control problem requires a perforated-plate geometry");
  ControlProblem p;
  Mesh base = build_mesh(plate);
  const int bottom = base.find_patch("ymin");
  if (bottom < 0) throw InvalidGeometry("plate mesh has no bottom boundary patch");
  p.mesh = split_boundary_patch(base, bottom, 4);
  for (int i = 0; i < 4; ++i)
    p.segments[i] = p.mesh.find_patch("ymin_s" + std::to_string(i));
  p.forcing = sample_hotspot_forcing(p.mesh, HotSpotConfig::for_length(plate.domain_length),
                                     forcing_seed);
  p.u_m = u_m;
  p.alpha = alpha;
  return p;
}

BoundarySpec control_boundary(const ControlProblem& problem, const Eigen::Vector4d& c) {
  BoundarySpec bc = BoundarySpec::all_neumann(problem.mesh, 0.0);
  for (int i = 0; i < 4; ++i) {
    const double value = c(i);
    bc.per_patch[problem.segments[i]] = {BCType::Dirichlet,
                                         [value](const Eigen::Vector3d&) { return value; }};
  }
  return bc;
}

namespace {

Eigen::VectorXd solve_control_system(const LinearSystem& sys, double tol) {
  PCGConfig cfg;
  cfg.abs_tol = tol;
  cfg.max_iters = 50000;
  auto [u, trace] = pcg_solve(sys, Eigen::VectorXd::Zero(sys.size()), cfg);
  if (!trace.converged) throw NoConvergence("control solve did not converge");
  return u;
}

}  // namespace

SensitivityBasis build_sensitivity(const ControlProblem& problem, double tol) {
  SensitivityBasis basis;
  // Heat generation enters the Poisson operator with a negative sign.
  basis.u0 = solve_control_system(
      assemble(problem.mesh, control_boundary(problem, Eigen::Vector4d::Zero()),
               -problem.forcing),
      tol);
  const Eigen::VectorXd zero_forcing = Eigen::VectorXd::Zero(problem.mesh.num_cells());
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector4d unit = Eigen::Vector4d::Zero();
    unit(i) = 1.0;
    basis.v[i] = solve_control_system(
        assemble(problem.mesh, control_boundary(problem, unit), zero_forcing), tol);
  }
  return basis;
}

Eigen::VectorXd control_solution(const SensitivityBasis& basis, const Eigen::Vector4d& c) {
  Eigen::VectorXd u = basis.u0;
  for (int i = 0; i < 4; ++i) u += c(i) * basis.v[i];
  return u;
}

ControlLossGrad control_loss(const SensitivityBasis& basis, const Eigen::Vector4d& c,
                             double u_m, double alpha, double smoothing_tau) {
  if (smoothing_tau < 0.0) throw InvalidArgument("smoothing tau must be >= 0");
  const Eigen::VectorXd u = control_solution(basis, c);
  ControlLossGrad out;

  Eigen::Vector4d max_grad = Eigen::Vector4d::Zero();
  if (smoothing_tau == 0.0) {
    out.u_max = u.maxCoeff(&out.argmax_cell);
    for (int i = 0; i < 4; ++i) max_grad(i) = basis.v[i](out.argmax_cell);
  } else {
    const double m = u.maxCoeff(&out.argmax_cell);
    const Eigen::ArrayXd w = ((u.array() - m) / smoothing_tau).exp();
    const double wsum = w.sum();
    out.u_max = m + smoothing_tau * std::log(wsum);
    for (int i = 0; i < 4; ++i) max_grad(i) = (w * basis.v[i].array()).sum() / wsum;
  }

  const double excess = out.u_max - u_m;
  out.loss = std::max(excess, 0.0) + alpha * 0.25 * c.squaredNorm();
  out.grad = (excess > 0.0 ? 1.0 : 0.0) * max_grad + 0.5 * alpha * c;
  return out;
}

ControlResult optimize_control(const ControlProblem& problem, const SensitivityBasis& basis,
                               int iters, double step, const TauSchedule& schedule) {
  if (iters < 0) throw InvalidArgument("iters must be >= 0");
  ControlResult res;
  Eigen::Vector4d c = Eigen::Vector4d::Zero();
  res.u_max_initial = control_solution(basis, c).maxCoeff();

  double tau = schedule.tau0;
  for (int t = 0; t < iters; ++t) {
    if (schedule.tau0 > 0.0 && schedule.period > 0 && t > 0 && t % schedule.period == 0)
      tau *= schedule.decay;
    const ControlLossGrad lg = control_loss(basis, c, problem.u_m, problem.alpha, tau);
    res.history.push_back({lg.loss, lg.u_max, 0.25 * c.cwiseAbs().sum(), c});
    c -= step * lg.grad;
  }

  res.c_opt = c;
  res.u_max_final = control_solution(basis, c).maxCoeff();
  res.success = res.u_max_final <= problem.u_m;
  for (int i = 0; i < 4; ++i)
    res.bounds_violated =
        res.bounds_violated || c(i) < problem.c_low - 1e-12 || c(i) > problem.c_high + 1e-12;
  return res;
}

}  // namespace fvlab
