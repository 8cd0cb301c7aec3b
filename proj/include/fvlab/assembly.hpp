#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <vector>

#include "fvlab/mesh.hpp"

namespace fvlab {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class BCType { Dirichlet, Neumann };

/// Boundary value evaluated at a boundary-face centroid.
using BCValueFn = std::function<double(const Eigen::Vector3d&)>;

struct PatchBC {
  BCType type = BCType::Dirichlet;
  BCValueFn value;
};

/// One entry per mesh patch, indexed by patch id.
struct BoundarySpec {
  std::vector<PatchBC> per_patch;

  static BoundarySpec uniform(const Mesh& mesh, BCType type, double value);
  static BoundarySpec all_dirichlet(const Mesh& mesh, double value = 0.0) {
    return uniform(mesh, BCType::Dirichlet, value);
  }
  static BoundarySpec all_neumann(const Mesh& mesh, double value = 0.0) {
    return uniform(mesh, BCType::Neumann, value);
  }
  bool any_dirichlet() const;
};

/// Per-cell diffusion coefficient D(x) > 0; D = 1 recovers the plain Laplacian.
struct CoefficientField {
  Eigen::VectorXd values;
  static CoefficientField constant(int n, double v = 1.0) {
    return {Eigen::VectorXd::Constant(n, v)};
  }
};

/// Sparse SPD system A u = b in compressed-row layout. For pure-Neumann
/// assemblies the constant null space is removed by pinning one reference cell
/// (identity row/column, zero rhs); `pinned_cell` records it.
struct LinearSystem {
  SpMat matrix;
  Eigen::VectorXd rhs;
  int pinned_cell = -1;
  bool pure_neumann = false;  // assembled from all-Neumann BCs

  int size() const { return static_cast<int>(rhs.size()); }
};

/// Flux-balance discretization of -div(D grad u) = -f over the mesh, negated
/// so the matrix is SPD with positive diagonal: b_i = -f_i |V_i| + boundary
/// terms. Interior faces use the harmonic mean of the adjacent cell
/// coefficients; boundary faces use the owner value. All-Neumann assemblies
/// first replace the forcing by its compatibility-normalized version and pin
/// the lowest-index cell.
LinearSystem assemble(const Mesh& mesh, const BoundarySpec& bc, const Eigen::VectorXd& forcing,
                      const CoefficientField& coeff);
LinearSystem assemble(const Mesh& mesh, const BoundarySpec& bc, const Eigen::VectorXd& forcing);

/// Subtracts the volume-weighted mean so the field integrates to zero.
Eigen::VectorXd normalize_neumann(const Eigen::VectorXd& forcing, const Mesh& mesh);

/// Replaces row/column `cell` by an identity row with zero rhs. Rejects
/// systems that are not singular (i.e. not assembled from all-Neumann BCs).
LinearSystem pin_reference(const LinearSystem& system, int cell);

}  // namespace fvlab
