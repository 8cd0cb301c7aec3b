#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "fvlab/assembly.hpp"
#include "fvlab/fields.hpp"

namespace fvlab {

/// Thermal boundary-control task on the perforated plate: steady heat
/// conduction grad^2 u = -f, four controllable Dirichlet segments on the
/// bottom boundary, zero-flux Neumann everywhere else.
struct ControlProblem {
  Mesh mesh;                     // bottom patch split into four segments
  std::array<int, 4> segments;   // patch ids of the controllable segments
  Eigen::VectorXd forcing;       // nonnegative heat-generation field
  double u_m = 25.0;             // peak-temperature threshold
  double alpha = 0.01;           // cooling-effort weight
  double c_low = -5.0, c_high = 5.0;  // reporting range only, never clipped
};

ControlProblem make_control_problem(const GeometrySpec& plate, std::uint64_t forcing_seed,
                                    double u_m = 25.0, double alpha = 0.01);

BoundarySpec control_boundary(const ControlProblem& problem, const Eigen::Vector4d& c);

/// u(c) = u0 + sum_i c_i v_i: the rhs is affine in the segment values, so the
/// solution is an exact superposition of one base solve and four sensitivity
/// solves.
struct SensitivityBasis {
  Eigen::VectorXd u0;
  std::array<Eigen::VectorXd, 4> v;
};

SensitivityBasis build_sensitivity(const ControlProblem& problem, double tol = 1e-10);

Eigen::VectorXd control_solution(const SensitivityBasis& basis, const Eigen::Vector4d& c);

struct ControlLossGrad {
  double loss = 0.0;
  Eigen::Vector4d grad = Eigen::Vector4d::Zero();
  double u_max = 0.0;
  int argmax_cell = -1;
};

/// L(c) = ReLU(u_max(c) - u_m) + alpha/4 sum c_i^2. tau = 0 uses the hard max
/// with the argmax subgradient; tau > 0 uses the log-sum-exp smooth max with
/// softmax-weighted sensitivities.
ControlLossGrad control_loss(const SensitivityBasis& basis, const Eigen::Vector4d& c,
                             double u_m, double alpha, double smoothing_tau = 0.0);

struct ControlHistoryEntry {
  double loss = 0.0;
  double u_max = 0.0;
  double effort = 0.0;  // (1/4) sum |c_i|
  Eigen::Vector4d c = Eigen::Vector4d::Zero();
};

struct TauSchedule {
  double tau0 = 0.0;        // 0: hard max throughout
  double decay = 0.5;       // multiplied in every `period` iterations
  int period = 25;
};

struct ControlResult {
  Eigen::Vector4d c_opt = Eigen::Vector4d::Zero();
  bool success = false;          // u_max(c_opt) <= u_m
  bool bounds_violated = false;  // any |c_i| outside the reporting range
  double u_max_initial = 0.0;
  double u_max_final = 0.0;
  std::vector<ControlHistoryEntry> history;
};

/// Fixed-step gradient descent on the control loss from c = 0. Infeasibility
/// is a reported outcome, not an error.
ControlResult optimize_control(const ControlProblem& problem, const SensitivityBasis& basis,
                               int iters = 100, double step = 1.0,
                               const TauSchedule& schedule = {});

}  // namespace fvlab
