#include "fvlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fvlab/rng.hpp"

namespace fvlab {

Eigen::VectorXd sample_trig_forcing(const Mesh& mesh, const TrigForcingConfig& config,
                                    std::uint64_t seed) {
  const int m = config.modes_per_axis;
  if (m < 1) throw InvalidArgument("modes_per_axis must be >= 1");
  const int n = mesh.num_cells();
  const int half = m / 2;

  // Coefficients are drawn by flat mode index only, so the field at a centroid
  // never depends on the mesh size or cell order.
  std::vector<double> coef_a(static_cast<std::size_t>(m) * m * m);
  std::vector<double> coef_b(coef_a.size());
  {
    rng::Stream sa(seed, "trig_a"), sb(seed, "trig_b");
    for (std::size_t i = 0; i < coef_a.size(); ++i) coef_a[i] = sa.normal();
    for (std::size_t i = 0; i < coef_b.size(); ++i) coef_b[i] = sb.normal();
  }
  const double bias = rng::Stream(seed, "trig_bias").normal(config.bias_mean, config.bias_std);

  Eigen::VectorXd f0(n);
  const bool flat_z = mesh.dim < 3;

  if (flat_z) {
    // z = 0 collapses the k sum onto each (i, j) pair.
    std::vector<double> a2(static_cast<std::size_t>(m) * m, 0.0), b2(a2.size(), 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double sa = 0.0, sb = 0.0;
        for (int k = 0; k < m; ++k) {
          const std::size_t idx = (static_cast<std::size_t>(i) * m + j) * m + k;
          sa += coef_a[idx];
          sb += coef_b[idx];
        }
        a2[static_cast<std::size_t>(i) * m + j] = sa;
        b2[static_cast<std::size_t>(i) * m + j] = sb;
      }
    std::vector<double> sx(m), cx(m), sy(m), cy(m);
    for (int c = 0; c < n; ++c) {
      const double x = mesh.cell_centroids(c, 0);
      const double y = mesh.cell_centroids(c, 1);
      for (int q = 0; q < m; ++q) {
        sx[q] = std::sin((q - half) * x);
        cx[q] = std::cos((q - half) * x);
        sy[q] = std::sin((q - half) * y);
        cy[q] = std::cos((q - half) * y);
      }
      double w = 0.0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          const double s = sx[i] * cy[j] + cx[i] * sy[j];  // sin(px + py)
          const double cc = cx[i] * cy[j] - sx[i] * sy[j];  // cos(px + py)
          const std::size_t idx = static_cast<std::size_t>(i) * m + j;
          w += a2[idx] * s + b2[idx] * cc;
        }
      f0(c) = w + bias;
    }
  } else {
    std::vector<double> sx(m), cx(m), sy(m), cy(m), sz(m), cz(m);
    for (int c = 0; c < n; ++c) {
      const double x = mesh.cell_centroids(c, 0);
      const double y = mesh.cell_centroids(c, 1);
      const double z = mesh.cell_centroids(c, 2);
      for (int q = 0; q < m; ++q) {
        sx[q] = std::sin((q - half) * x);
        cx[q] = std::cos((q - half) * x);
        sy[q] = std::sin((q - half) * y);
        cy[q] = std::cos((q - half) * y);
        sz[q] = std::sin((q - half) * z);
        cz[q] = std::cos((q - half) * z);
      }
      double w = 0.0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          const double syz_s = sx[i] * cy[j] + cx[i] * sy[j];
          const double syz_c = cx[i] * cy[j] - sx[i] * sy[j];
          const std::size_t base = (static_cast<std::size_t>(i) * m + j) * m;
          for (int k = 0; k < m; ++k) {
            const double s = syz_s * cz[k] + syz_c * sz[k];  // sin(px + py + pz)
            const double cc = syz_c * cz[k] - syz_s * sz[k];
            w += coef_a[base + k] * s + coef_b[base + k] * cc;
          }
        }
      f0(c) = w + bias;
    }
  }

  const double scale = f0.cwiseAbs().maxCoeff() + config.eps;
  return f0 / scale;
}

Eigen::VectorXd sample_hotspot_forcing(const Mesh& mesh, const HotSpotConfig& config,
                                       std::uint64_t seed) {
  if (mesh.dim != 2) throw InvalidArgument("hot-spot forcing is defined on 2D meshes");
  if (config.k_min < 1 || config.k_max < config.k_min)
    throw InvalidArgument("hot-spot count range is empty");
  if (!(config.width_min > 0.0) || config.width_max < config.width_min)
    throw InvalidArgument("hot-spot width range is empty");
  const int n = mesh.num_cells();

  // Centers are picked by lexicographic centroid rank, so a reordering of the
  // cells permutes the field rather than changing it.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (mesh.cell_centroids(a, 1) != mesh.cell_centroids(b, 1))
      return mesh.cell_centroids(a, 1) < mesh.cell_centroids(b, 1);
    return mesh.cell_centroids(a, 0) < mesh.cell_centroids(b, 0);
  });

  rng::Stream count(seed, "hotspot_count");
  rng::Stream centers(seed, "hotspot_center");
  rng::Stream amps(seed, "hotspot_amp");
  rng::Stream widths(seed, "hotspot_width");

  const int k = static_cast<int>(count.uniform_int(config.k_min, config.k_max));
  std::vector<Eigen::Vector2d> mu(k);
  std::vector<double> amp(k), width(k);
  for (int i = 0; i < k; ++i) {
    const int cell = order[static_cast<int>(centers.below(static_cast<std::uint64_t>(n)))];
    mu[i] = mesh.cell_centroids.row(cell).head<2>();
  }
  for (int i = 0; i < k; ++i) amp[i] = amps.uniform(config.amp_min, config.amp_max);
  for (int i = 0; i < k; ++i) width[i] = widths.uniform(config.width_min, config.width_max);

  Eigen::VectorXd f0 = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < k; ++i) {
    const double inv = 1.0 / (width[i] + config.eps);
    for (int c = 0; c < n; ++c) {
      const double dx = (mesh.cell_centroids(c, 0) - mu[i].x()) * inv;
      const double dy = (mesh.cell_centroids(c, 1) - mu[i].y()) * inv;
      f0(c) += amp[i] * std::exp(-0.5 * dx * dx - 0.5 * dy * dy);
    }
  }
  return f0 / (f0.mean() + config.eps);
}

}  // namespace fvlab
