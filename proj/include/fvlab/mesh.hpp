#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "fvlab/geometry.hpp"

#include <nlohmann/json_fwd.hpp>

namespace fvlab {

struct InteriorFace {
  int owner = -1;     // lower cell index
  int neighbor = -1;  // higher cell index
  double area = 0.0;
  double normal_distance = 0.0;  // centroid-to-centroid, h on a uniform grid
};

struct BoundaryFace {
  int owner = -1;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  double area = 0.0;
  double normal_distance = 0.0;  // centroid-to-face, h/2 on a uniform grid
  int patch_id = -1;
};

struct Patch {
  int patch_id = -1;
  std::string label;
};

/// Cell-centered finite-volume mesh obtained by masking a uniform Cartesian
/// grid. Cells are indexed row-major over the base grid restricted to kept
/// cells (x fastest, then y, then z). Immutable once built.
struct Mesh {
  int dim = 2;
  double h = 0.0;  // uniform cell width
  Eigen::Matrix<double, Eigen::Dynamic, 3> cell_centroids;  // z = 0 in 1D/2D
  Eigen::VectorXd cell_volumes;
  std::vector<InteriorFace> interior_faces;
  std::vector<BoundaryFace> boundary_faces;
  std::vector<Patch> patches;
  std::string geometry_json;  // generating spec, empty for synthetic meshes

  int num_cells() const { return static_cast<int>(cell_volumes.size()); }
  int num_patches() const { return static_cast<int>(patches.size()); }
  int find_patch(const std::string& label) const;  // -1 if absent
};

/// Masks the base grid of `spec` by the containment predicate and builds the
/// mesh. Throws EmptyDomain / DisconnectedDomain.
Mesh build_mesh(const GeometrySpec& spec);

/// Grid-mask backend of build_mesh, exposed for synthetic masks in tests.
/// `keep` is indexed (iz*ny + iy)*nx + ix. When `merge_cut_patches` is set all
/// faces against masked (not exterior) cells form one patch.
Mesh build_masked_grid(int nx, int ny, int nz, double h, int dim, const std::vector<char>& keep,
                       bool merge_cut_patches, std::string geometry_json = {},
                       const std::string& cut_label = "cut");

/// Degenerate 1D mesh on [0, length] used by discretization tests.
Mesh make_interval_mesh(int n_cells, double length = 1.0);

/// Boundary faces grouped by patch id (index = patch id).
std::vector<std::vector<int>> patch_segments(const Mesh& mesh);

/// Splits one patch into `parts` contiguous groups of near-equal face counts
/// (ordered along the segment). The first part keeps the original patch id;
/// the rest are appended with labels "<label>_s1" ... .
Mesh split_boundary_patch(const Mesh& mesh, int patch_id, int parts);

nlohmann::json mesh_to_json(const Mesh& mesh);
Mesh mesh_from_json(const nlohmann::json& j);
void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);

/// Compact binary sidecar for large meshes (raw little-endian arrays).
void save_mesh_binary(const Mesh& mesh, const std::string& path);
Mesh load_mesh_binary(const std::string& path);

}  // namespace fvlab
