#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "fvlab/assembly.hpp"
#include "fvlab/krylov.hpp"

namespace fvlab {

enum class TrainMode { IterativeSupervision, ResidualSupervision, DataSupervision };
enum class Parameterization { FeatureMlp, FreeVector };

/// Per-cell feature map: normalized coordinates, forcing value, distance to
/// the nearest Dirichlet face, distance to the nearest Neumann face, cell
/// volume. Missing-face distances fall back to the domain diameter.
Eigen::MatrixXd build_features(const Mesh& mesh, const BoundarySpec& bc,
                               const Eigen::VectorXd& forcing);

/// Per-cell two-layer perceptron (tanh) with hand-written reverse-mode
/// gradients, or a free vector (one trainable value per cell) for the
/// fixed-point-iteration equivalence experiments.
struct SurrogateModel {
  Parameterization param = Parameterization::FeatureMlp;
  int hidden_width = 64;
  Eigen::MatrixXd w1;      // hidden x features
  Eigen::VectorXd b1;      // hidden
  Eigen::VectorXd w2;      // hidden (zero-initialized: zero initial prediction)
  double b2 = 0.0;
  Eigen::VectorXd free_vec;
};

SurrogateModel make_surrogate(int n_features, int hidden_width, std::uint64_t seed);
SurrogateModel make_free_vector_model(int n_cells);

struct ParamGrads {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2 = 0.0;
  Eigen::VectorXd free_vec;
};

struct ForwardCache {
  Eigen::MatrixXd hidden;  // tanh activations, cells x hidden
  Eigen::VectorXd output;
};

ForwardCache forward(const SurrogateModel& model, const Eigen::MatrixXd& features);

/// Reverse-mode gradients of sum(dLdy . output) with respect to parameters.
ParamGrads backward(const SurrogateModel& model, const Eigen::MatrixXd& features,
                    const ForwardCache& cache, const Eigen::VectorXd& dLdy);

void apply_update(SurrogateModel& model, const ParamGrads& grads, double learning_rate);

/// Prediction for one instance; validates feature/forcing consistency.
Eigen::VectorXd predict(const SurrogateModel& model, const Mesh& mesh, const BoundarySpec& bc,
                        const Eigen::VectorXd& forcing);

/// Iterative supervision loss ||u - F_K(u)||_2^2. With stop_gradient the
/// gradient is the semi-gradient 2(u - F_K(u)); without it the loss is taken
/// through the differentiable Richardson surrogate R(u) = u - omega M^{-1}(Au-b)
/// composed K times and differentiated exactly (omega <= 0 picks
/// 1/lambda_max(C) automatically).
std::pair<double, Eigen::VectorXd> loss_iterative(const LinearSystem& system,
                                                  const Eigen::VectorXd& u, int K,
                                                  bool stop_gradient, double omega = 0.0);

/// Residual loss ||A u - b||_2^2 with gradient 2 A (A u - b).
std::pair<double, Eigen::VectorXd> loss_residual(const LinearSystem& system,
                                                 const Eigen::VectorXd& u);

std::pair<double, Eigen::VectorXd> loss_data(const Eigen::VectorXd& u,
                                             const Eigen::VectorXd& u_ref);

struct TrainConfig {
  TrainMode mode = TrainMode::IterativeSupervision;
  int K = 40;
  bool stop_gradient = true;
  double learning_rate = 1e-2;
  int steps = 1000;
  std::uint64_t seed = 0;
  double richardson_omega = 0.0;  // 0: auto per instance
};

struct StepRecord {
  double loss = 0.0;
  double rel_l2 = 0.0;        // prediction vs reference, before the update
  double energy_error = 0.0;  // ||prediction - u_ref||_A
  double t_forward = 0.0;     // seconds
  double t_loss = 0.0;        // target generation / loss + its prediction-gradient
  double t_backward = 0.0;    // backward pass + parameter update
  double t_total = 0.0;
};

struct SupervisionRun {
  std::vector<StepRecord> steps;
  bool diverged = false;
  int diverged_step = -1;
  double final_rel_l2 = 0.0;
  double final_energy_error = 0.0;
  double mean_loss_time = 0.0;   // Table-style cost breakdown
  double mean_total_time = 0.0;
  double loss_ratio = 0.0;
};

/// One training instance: mesh + boundary + forcing assembled into a system,
/// with the converged reference solution and cached features.
struct TrainInstance {
  LinearSystem system;
  Eigen::MatrixXd features;
  Eigen::VectorXd u_ref;
  double omega = 0.0;  // Richardson step for the through-gradient branch
};

TrainInstance make_train_instance(const Mesh& mesh, const BoundarySpec& bc,
                                  const Eigen::VectorXd& forcing);

/// Plain fixed-rate gradient descent on the selected loss; per-step metrics
/// and cost breakdown recorded. Divergence (loss above 1e6 x initial) is
/// reported, not thrown.
SupervisionRun train(SurrogateModel& model, const std::vector<TrainInstance>& instances,
                     const TrainConfig& config);

}  // namespace fvlab
