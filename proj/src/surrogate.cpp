#include "fvlab/surrogate.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "fvlab/rng.hpp"

namespace fvlab {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Eigen::MatrixXd build_features(const Mesh& mesh, const BoundarySpec& bc,
                               const Eigen::VectorXd& forcing) {
  const int n = mesh.num_cells();
  if (forcing.size() != n) throw FeatureMismatch("forcing length does not match cell count");
  if (static_cast<int>(bc.per_patch.size()) != mesh.num_patches())
    throw FeatureMismatch("boundary spec does not cover the mesh patches");

  const Eigen::Vector3d lo = mesh.cell_centroids.colwise().minCoeff();
  const Eigen::Vector3d hi = mesh.cell_centroids.colwise().maxCoeff();
  const double diameter = (hi - lo).norm() + mesh.h;
  const double scale = std::max((hi - lo).maxCoeff() + mesh.h, 1e-300);

  const int nf = mesh.dim + 4;
  Eigen::MatrixXd phi(n, nf);
  for (int c = 0; c < n; ++c)
    for (int a = 0; a < mesh.dim; ++a) phi(c, a) = mesh.cell_centroids(c, a) / scale;
  phi.col(mesh.dim) = forcing;

  // Distance to the nearest boundary face of each BC type.
  Eigen::VectorXd dist_d = Eigen::VectorXd::Constant(n, diameter);
  Eigen::VectorXd dist_n = Eigen::VectorXd::Constant(n, diameter);
  for (const BoundaryFace& f : mesh.boundary_faces) {
    const bool dirichlet = bc.per_patch[f.patch_id].type == BCType::Dirichlet;
    Eigen::VectorXd& target = dirichlet ? dist_d : dist_n;
    for (int c = 0; c < n; ++c) {
      const double d = (mesh.cell_centroids.row(c).transpose() - f.centroid).norm();
      if (d < target(c)) target(c) = d;
    }
  }
  phi.col(mesh.dim + 1) = dist_d / scale;
  phi.col(mesh.dim + 2) = dist_n / scale;
  phi.col(mesh.dim + 3) = mesh.cell_volumes / std::pow(mesh.h, mesh.dim);
  return phi;
}

SurrogateModel make_surrogate(int n_features, int hidden_width, std::uint64_t seed) {
  if (n_features < 1 || hidden_width < 1) throw InvalidArgument("bad surrogate dimensions");
  SurrogateModel m;
  m.param = Parameterization::FeatureMlp;
  m.hidden_width = hidden_width;
  rng::Stream st(seed, "mlp_init");
  m.w1.resize(hidden_width, n_features);
  const double std1 = 1.0 / std::sqrt(static_cast<double>(n_features));
  for (int i = 0; i < hidden_width; ++i)
    for (int j = 0; j < n_features; ++j) m.w1(i, j) = st.normal(0.0, std1);
  m.b1 = Eigen::VectorXd::Zero(hidden_width);
  m.w2 = Eigen::VectorXd::Zero(hidden_width);
  m.b2 = 0.0;
  return m;
}

SurrogateModel make_free_vector_model(int n_cells) {
  SurrogateModel m;
  m.param = Parameterization::FreeVector;
  m.free_vec = Eigen::VectorXd::Zero(n_cells);
  return m;
}

ForwardCache forward(const SurrogateModel& model, const Eigen::MatrixXd& features) {
  ForwardCache cache;
  if (model.param == Parameterization::FreeVector) {
    cache.output = model.free_vec;
    return cache;
  }
  cache.hidden = ((features * model.w1.transpose()).rowwise() + model.b1.transpose())
                     .array()
                     .tanh();
  cache.output = cache.hidden * model.w2;
  cache.output.array() += model.b2;
  return cache;
}

ParamGrads backward(const SurrogateModel& model, const Eigen::MatrixXd& features,
                    const ForwardCache& cache, const Eigen::VectorXd& dLdy) {
  ParamGrads g;
  if (model.param == Parameterization::FreeVector) {
    g.free_vec = dLdy;
    return g;
  }
  g.w2 = cache.hidden.transpose() * dLdy;
  g.b2 = dLdy.sum();
  const Eigen::MatrixXd dh =
      (dLdy * model.w2.transpose()).array() * (1.0 - cache.hidden.array().square());
  g.b1 = dh.colwise().sum().transpose();
  g.w1 = dh.transpose() * features;
  return g;
}

void apply_update(SurrogateModel& model, const ParamGrads& grads, double learning_rate) {
  if (model.param == Parameterization::FreeVector) {
    model.free_vec -= learning_rate * grads.free_vec;
    return;
  }
  model.w1 -= learning_rate * grads.w1;
  model.b1 -= learning_rate * grads.b1;
  model.w2 -= learning_rate * grads.w2;
  model.b2 -= learning_rate * grads.b2;
}

Eigen::VectorXd predict(const SurrogateModel& model, const Mesh& mesh, const BoundarySpec& bc,
                        const Eigen::VectorXd& forcing) {
  if (forcing.size() != mesh.num_cells())
    throw FeatureMismatch("forcing length does not match cell count");
  if (model.param == Parameterization::FreeVector) {
    if (model.free_vec.size() != mesh.num_cells())
      throw FeatureMismatch("free vector length does not match cell count");
    return model.free_vec;
  }
  return forward(model, build_features(mesh, bc, forcing)).output;
}

std::pair<double, Eigen::VectorXd> loss_iterative(const LinearSystem& sys,
                                                  const Eigen::VectorXd& u, int K,
                                                  bool stop_gradient, double omega) {
  if (K < 1) throw InvalidArgument("K must be >= 1");
  if (stop_gradient) {
    const Eigen::VectorXd s = self_consistency_residual(sys, u, K);
    return {s.squaredNorm(), 2.0 * s};
  }

  // Differentiable Richardson stand-in: R(u) = u - omega M^{-1}(A u - b) with
  // constant Jacobian J = I - omega M^{-1} A, so the K-fold composite has
  // Jacobian J^K and the full gradient is 2 (I - (J')^K) s.
  if (omega <= 0.0) omega = 1.0 / estimate_lambda_max(sys);
  const Eigen::VectorXd d = sys.matrix.diagonal();
  Eigen::VectorXd v = u;
  for (int k = 0; k < K; ++k) v -= omega * (sys.matrix * v - sys.rhs).cwiseQuotient(d);
  const Eigen::VectorXd s = u - v;

  Eigen::VectorXd jt = s;  // (J')^K s, applied as J' = I - omega A M^{-1}
  for (int k = 0; k < K; ++k) jt -= omega * (sys.matrix * jt.cwiseQuotient(d));
  return {s.squaredNorm(), 2.0 * (s - jt)};
}

std::pair<double, Eigen::VectorXd> loss_residual(const LinearSystem& sys,
                                                 const Eigen::VectorXd& u) {
  const Eigen::VectorXd r = sys.matrix * u - sys.rhs;
  return {r.squaredNorm(), 2.0 * (sys.matrix * r)};
}

std::pair<double, Eigen::VectorXd> loss_data(const Eigen::VectorXd& u,
                                             const Eigen::VectorXd& u_ref) {
  const Eigen::VectorXd d = u - u_ref;
  return {d.squaredNorm(), 2.0 * d};
}

TrainInstance make_train_instance(const Mesh& mesh, const BoundarySpec& bc,
                                  const Eigen::VectorXd& forcing) {
  TrainInstance inst;
  inst.system = assemble(mesh, bc, forcing);
  inst.features = build_features(mesh, bc, forcing);
  PCGConfig cfg;
  cfg.abs_tol = 1e-12;
  cfg.max_iters = 20000;
  auto [u, trace] = pcg_solve(inst.system, Eigen::VectorXd::Zero(inst.system.size()), cfg);
  if (!trace.converged) throw NoConvergence("reference solve did not converge");
  inst.u_ref = std::move(u);
  inst.omega = 1.0 / estimate_lambda_max(inst.system);
  return inst;
}

SupervisionRun train(SurrogateModel& model, const std::vector<TrainInstance>& instances,
                     const TrainConfig& config) {
  if (instances.empty()) throw InvalidArgument("need at least one training instance");
  if (!(config.learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (config.K < 1) throw InvalidArgument("K must be >= 1");

  SupervisionRun run;
  run.steps.reserve(config.steps);
  double initial_loss = -1.0;

  for (int t = 0; t < config.steps; ++t) {
    const TrainInstance& inst = instances[t % instances.size()];
    StepRecord rec;
    const auto t_step = std::chrono::steady_clock::now();

    const auto t_fwd = std::chrono::steady_clock::now();
    const ForwardCache cache = forward(model, inst.features);
    rec.t_forward = seconds_since(t_fwd);

    const auto t_loss = std::chrono::steady_clock::now();
    std::pair<double, Eigen::VectorXd> lg;
    switch (config.mode) {
      case TrainMode::IterativeSupervision:
        lg = loss_iterative(inst.system, cache.output, config.K, config.stop_gradient,
                            config.richardson_omega > 0.0 ? config.richardson_omega
                                                          : inst.omega);
        break;
      case TrainMode::ResidualSupervision:
        lg = loss_residual(inst.system, cache.output);
        break;
      case TrainMode::DataSupervision:
        lg = loss_data(cache.output, inst.u_ref);
        break;
    }
    rec.t_loss = seconds_since(t_loss);

    const auto t_bwd = std::chrono::steady_clock::now();
    const ParamGrads grads = backward(model, inst.features, cache, lg.second);
    apply_update(model, grads, config.learning_rate);
    rec.t_backward = seconds_since(t_bwd);

    rec.t_total = seconds_since(t_step);
    rec.loss = lg.first;
    const double refn = std::max(inst.u_ref.norm(), 1e-300);
    rec.rel_l2 = (cache.output - inst.u_ref).norm() / refn;
    rec.energy_error = energy_norm(inst.system, cache.output - inst.u_ref);
    run.steps.push_back(rec);

    if (initial_loss < 0.0) initial_loss = std::max(rec.loss, 1e-30);
    if (!std::isfinite(rec.loss) || rec.loss > 1e6 * initial_loss) {
      run.diverged = true;
      run.diverged_step = t;
      break;
    }
  }

  // Final metrics on the post-update model, against the first instance.
  const TrainInstance& inst0 = instances.front();
  const Eigen::VectorXd y = forward(model, inst0.features).output;
  run.final_rel_l2 = run.diverged ? std::numeric_limits<double>::infinity()
                                  : (y - inst0.u_ref).norm() / std::max(inst0.u_ref.norm(), 1e-300);
  run.final_energy_error =
      run.diverged ? std::numeric_limits<double>::infinity()
                   : energy_norm(inst0.system, y - inst0.u_ref);

  double loss_sum = 0.0, total_sum = 0.0;
  for (const StepRecord& r : run.steps) {
    loss_sum += r.t_loss;
    total_sum += r.t_total;
  }
  const auto n_steps = static_cast<double>(std::max<std::size_t>(run.steps.size(), 1));
  run.mean_loss_time = loss_sum / n_steps;
  run.mean_total_time = total_sum / n_steps;
  run.loss_ratio = total_sum > 0.0 ? loss_sum / total_sum : 0.0;
  return run;
}

}  // namespace fvlab
