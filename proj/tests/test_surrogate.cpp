#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "fvlab/fields.hpp"
#include "fvlab/surrogate.hpp"
#include "fvlab/theory.hpp"

using namespace fvlab;

namespace {

const double L = kDefaultDomainLength;

struct Setup {
  Mesh mesh;
  BoundarySpec bc;
  Eigen::VectorXd forcing;
  LinearSystem sys;
};

Setup make_setup(int resolution = 8, int category = 1, std::uint64_t seed = 3,
                 const std::string& regime = "dirichlet") {
  Setup s;
  s.mesh = build_mesh(sample_corner_removed_square(category, seed, L, resolution));
  s.bc = regime_boundary(s.mesh, regime, seed);
  s.forcing = sample_trig_forcing(s.mesh, TrigForcingConfig{}, seed);
  s.sys = assemble(s.mesh, s.bc, s.forcing);
  return s;
}

// Central finite differences of a scalar function of the parameters.
template <typename Loss>
void check_param_gradient(SurrogateModel& model, const Eigen::MatrixXd& phi, const Loss& loss,
                          double step = 1e-5, double tol = 1e-6) {
  const ForwardCache cache = forward(model, phi);
  auto [value, dLdy] = loss(cache.output);
  const ParamGrads g = backward(model, phi, cache, dLdy);

  auto probe = [&](double* param, double analytic) {
    const double saved = *param;
    *param = saved + step;
    const double up = loss(forward(model, phi).output).first;
    *param = saved - step;
    const double dn = loss(forward(model, phi).output).first;
    *param = saved;
    const double fd = (up - dn) / (2.0 * step);
    const double scale = std::max({std::abs(fd), std::abs(analytic), 1e-6});
    CHECK(std::abs(fd - analytic) <= tol * scale);
  };

  // a representative slice of each parameter block
  probe(&model.b2, g.b2);
  for (int i = 0; i < std::min<int>(4, model.w2.size()); ++i) probe(&model.w2(i), g.w2(i));
  for (int i = 0; i < std::min<int>(3, model.b1.size()); ++i) probe(&model.b1(i), g.b1(i));
  for (int i = 0; i < std::min<int>(2, model.w1.rows()); ++i)
    for (int j = 0; j < std::min<int>(3, model.w1.cols()); ++j)
      probe(&model.w1(i, j), g.w1(i, j));
}

}  // namespace

TEST_CASE("zero output layer predicts zero everywhere") {
  const Setup s = make_setup();
  const SurrogateModel model = make_surrogate(s.mesh.dim + 4, 64, 1);
  const Eigen::VectorXd y = predict(model, s.mesh, s.bc, s.forcing);
  CHECK(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("prediction rejects mismatched forcing") {
  const Setup s = make_setup();
  const SurrogateModel model = make_surrogate(s.mesh.dim + 4, 16, 1);
  CHECK_THROWS_AS(predict(model, s.mesh, s.bc, Eigen::VectorXd::Zero(3)), FeatureMismatch);
}

TEST_CASE("prediction is equivariant under cell reindexing") {
  const Setup s = make_setup();
  SurrogateModel model = make_surrogate(s.mesh.dim + 4, 16, 2);
  model.w2 = Eigen::VectorXd::Constant(16, 0.3);  // nontrivial output layer
  model.b2 = 0.1;
  const Eigen::VectorXd y = predict(model, s.mesh, s.bc, s.forcing);

  Mesh rev = s.mesh;
  Eigen::VectorXd frev(s.mesh.num_cells());
  const int n = s.mesh.num_cells();
  for (int i = 0; i < n; ++i) {
    rev.cell_centroids.row(i) = s.mesh.cell_centroids.row(n - 1 - i);
    rev.cell_volumes(i) = s.mesh.cell_volumes(n - 1 - i);
    frev(i) = s.forcing(n - 1 - i);
  }
  // boundary faces keep owner indices; remap them so distances are consistent
  for (BoundaryFace& f : rev.boundary_faces) f.owner = n - 1 - f.owner;
  const Eigen::VectorXd yrev = predict(model, rev, s.bc, frev);
  for (int i = 0; i < n; ++i) CHECK(yrev(i) == y(n - 1 - i));
}

TEST_CASE("model gradients match finite differences through each loss") {
  const Setup s = make_setup(6, 0, 4);
  SurrogateModel model = make_surrogate(s.mesh.dim + 4, 8, 3);
  // train one step so the output layer is nonzero and layer-1 gradients flow
  TrainConfig warm;
  warm.mode = TrainMode::DataSupervision;
  warm.steps = 1;
  warm.learning_rate = 1e-2;
  std::vector<TrainInstance> inst;
  inst.push_back(make_train_instance(s.mesh, s.bc, s.forcing));
  train(model, inst, warm);

  const Eigen::MatrixXd phi = inst[0].features;
  SUBCASE("data loss") {
    const Eigen::VectorXd target = inst[0].u_ref;
    check_param_gradient(model, phi,
                         [&](const Eigen::VectorXd& y) { return loss_data(y, target); });
  }
  SUBCASE("iterative stop-gradient semi-gradient is 2 s_K") {
    const ForwardCache cache = forward(model, phi);
    auto [value, grad] = loss_iterative(inst[0].system, cache.output, 5, true);
    const Eigen::VectorXd s5 = self_consistency_residual(inst[0].system, cache.output, 5);
    CHECK(value == doctest::Approx(s5.squaredNorm()).epsilon(1e-14));
    CHECK((grad - 2.0 * s5).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("iterative through-gradient matches finite differences") {
    const double omega = inst[0].omega;
    check_param_gradient(model, phi, [&](const Eigen::VectorXd& y) {
      return loss_iterative(inst[0].system, y, 3, false, omega);
    });
  }
  SUBCASE("residual loss matches finite differences") {
    check_param_gradient(model, phi, [&](const Eigen::VectorXd& y) {
      return loss_residual(inst[0].system, y);
    });
  }
}

TEST_CASE("residual objective carries squared conditioning") {
  const Setup s = make_setup(5, 0, 2);
  const Eigen::MatrixXd A(s.sys.matrix);
  // Hessian of ||Au-b||^2 is 2 A'A = 2 A^2
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(A, Eigen::EigenvaluesOnly);
  const auto& ev = ea.eigenvalues();
  const double kappa_a = ev(ev.size() - 1) / ev(0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eh(Eigen::MatrixXd(2.0 * A * A),
                                                    Eigen::EigenvaluesOnly);
  const auto& eh_ev = eh.eigenvalues();
  const double kappa_h = eh_ev(eh_ev.size() - 1) / eh_ev(0);
  CHECK(kappa_h == doctest::Approx(kappa_a * kappa_a).epsilon(1e-8));
}

TEST_CASE("free-vector iterative training is the relaxed fixed-point iteration") {
  const Setup s = make_setup(6, 2, 8);
  std::vector<TrainInstance> inst;
  inst.push_back(make_train_instance(s.mesh, s.bc, s.forcing));
  const int n = s.sys.size();

  const double eta = 0.5;
  TrainConfig cfg;
  cfg.mode = TrainMode::IterativeSupervision;
  cfg.K = 4;
  cfg.stop_gradient = true;
  cfg.learning_rate = eta / 2.0;  // semi-gradient 2 s_K makes this step eta
  cfg.steps = 10;

  SurrogateModel model = make_free_vector_model(n);
  train(model, inst, cfg);

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  for (int t = 0; t < cfg.steps; ++t)
    u -= eta * self_consistency_residual(inst[0].system, u, cfg.K);

  CHECK((model.free_vec - u).cwiseAbs().maxCoeff() == 0.0);  // bitwise equal
}

TEST_CASE("free-vector iteration obeys the contraction bound") {
  const Setup s = make_setup(8, 4, 9);
  std::vector<TrainInstance> inst;
  inst.push_back(make_train_instance(s.mesh, s.bc, s.forcing));
  const double rho = rho_for_bounds(inst[0].system);
  const int K = 5;
  const double eta = 0.8;
  const double bound = 1.0 - eta * (1.0 - std::pow(rho, K));

  TrainConfig cfg;
  cfg.mode = TrainMode::IterativeSupervision;
  cfg.K = K;
  cfg.stop_gradient = true;
  cfg.learning_rate = eta / 2.0;
  cfg.steps = 30;

  SurrogateModel model = make_free_vector_model(s.sys.size());
  model.free_vec = Eigen::VectorXd::Random(s.sys.size());
  const SupervisionRun run = train(model, inst, cfg);
  for (std::size_t t = 1; t < run.steps.size(); ++t) {
    if (run.steps[t - 1].energy_error < 1e-12 * run.steps[0].energy_error) break;
    CHECK(run.steps[t].energy_error <=
          bound * run.steps[t - 1].energy_error * (1.0 + 1e-10));
  }
}

TEST_CASE("data supervision decreases the error monotonically at small rate") {
  const Setup s = make_setup(8, 0, 5);
  std::vector<TrainInstance> inst;
  inst.push_back(make_train_instance(s.mesh, s.bc, s.forcing));
  SurrogateModel model = make_surrogate(s.mesh.dim + 4, 32, 7);
  TrainConfig cfg;
  cfg.mode = TrainMode::DataSupervision;
  cfg.learning_rate = 1e-3;
  cfg.steps = 100;
  const SupervisionRun run = train(model, inst, cfg);
  CHECK_FALSE(run.diverged);
  for (std::size_t t = 1; t < run.steps.size(); ++t)
    CHECK(run.steps[t].rel_l2 <= run.steps[t - 1].rel_l2 * (1.0 + 1e-9));
}

TEST_CASE("divergence is reported with its step index") {
  const Setup s = make_setup(8, 0, 5);
  std::vector<TrainInstance> inst;
  inst.push_back(make_train_instance(s.mesh, s.bc, s.forcing));
  SurrogateModel model = make_free_vector_model(s.sys.size());
  model.free_vec = Eigen::VectorXd::Random(s.sys.size());
  TrainConfig cfg;
  cfg.mode = TrainMode::ResidualSupervision;
  cfg.learning_rate = 10.0;  // far beyond the stable range for curvature A^2
  cfg.steps = 200;
  const SupervisionRun run = train(model, inst, cfg);
  CHECK(run.diverged);
  CHECK(run.diverged_step >= 0);
  CHECK(std::isinf(run.final_rel_l2));
}

TEST_CASE("per-step cost breakdown is recorded") {
  const Setup s = make_setup(10, 0, 6);
  std::vector<TrainInstance> inst;
  inst.push_back(make_train_instance(s.mesh, s.bc, s.forcing));
  SurrogateModel model = make_surrogate(s.mesh.dim + 4, 32, 4);
  TrainConfig cfg;
  cfg.mode = TrainMode::IterativeSupervision;
  cfg.K = 10;
  cfg.learning_rate = 1e-3;
  cfg.steps = 20;
  const SupervisionRun run = train(model, inst, cfg);
  REQUIRE(run.steps.size() == 20);
  CHECK(run.mean_total_time > 0.0);
  CHECK(run.loss_ratio > 0.0);
  CHECK(run.loss_ratio < 1.0);
  for (const StepRecord& r : run.steps) CHECK(r.t_total >= r.t_loss);
}
