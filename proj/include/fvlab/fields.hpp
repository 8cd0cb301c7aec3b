#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "fvlab/mesh.hpp"

namespace fvlab {

/// Random trigonometric forcing: W(x) = sum over M^3 centered frequency
/// triples of A sin(phi) + B cos(phi), plus a Gaussian bias, max-normalized.
struct TrigForcingConfig {
  int modes_per_axis = 10;
  double bias_mean = -1.0;
  double bias_std = 1.0;  // standard deviation, not variance
  double eps = 1e-8;
};

/// Sum of Gaussian hot spots with random count, centers, amplitudes and
/// isotropic widths, scaled to unit sample mean.
struct HotSpotConfig {
  int k_min = 2;
  int k_max = 6;
  double amp_min = 0.5;
  double amp_max = 2.0;
  double width_min = 0.0;  // 0.02 L
  double width_max = 0.0;  // 0.08 L
  double eps = 1e-8;

  static HotSpotConfig for_length(double length) {
    HotSpotConfig c;
    c.width_min = 0.02 * length;
    c.width_max = 0.08 * length;
    return c;
  }
};

Eigen::VectorXd sample_trig_forcing(const Mesh& mesh, const TrigForcingConfig& config,
                                    std::uint64_t seed);

Eigen::VectorXd sample_hotspot_forcing(const Mesh& mesh, const HotSpotConfig& config,
                                       std::uint64_t seed);

}  // namespace fvlab
