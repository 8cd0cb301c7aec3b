#include "fvlab/assembly.hpp"

#include <vector>

namespace fvlab {

BoundarySpec BoundarySpec::uniform(const Mesh& mesh, BCType type, double value) {
  BoundarySpec bc;
  bc.per_patch.assign(mesh.num_patches(), PatchBC{type, [value](const Eigen::Vector3d&) {
                                                    return value;
                                                  }});
  return bc;
}

bool BoundarySpec::any_dirichlet() const {
  for (const PatchBC& p : per_patch)
    if (p.type == BCType::Dirichlet) return true;
  return false;
}

namespace {

// Compensated (Kahan) sum; normalize_neumann promises a 1e-14-relative mean.
double kahan_sum(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double sum = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double term = a(i) * b(i) - comp;
    const double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  return sum;
}

}  // namespace

Eigen::VectorXd normalize_neumann(const Eigen::VectorXd& forcing, const Mesh& mesh) {
  if (forcing.size() != mesh.num_cells())
    throw InvalidArgument("forcing length does not match cell count");
  const double fv = kahan_sum(forcing, mesh.cell_volumes);
  const double v = kahan_sum(mesh.cell_volumes, Eigen::VectorXd::Ones(mesh.num_cells()));
  return forcing.array() - fv / v;
}

LinearSystem assemble(const Mesh& mesh, const BoundarySpec& bc, const Eigen::VectorXd& forcing,
                      const CoefficientField& coeff) {
  const int n = mesh.num_cells();
  if (forcing.size() != n) throw InvalidArgument("forcing length does not match cell count");
  if (coeff.values.size() != n)
    throw InvalidArgument("coefficient length does not match cell count");
  if ((coeff.values.array() <= 0.0).any())
    throw NonPositiveCoefficient("coefficient field must be strictly positive");
  if (static_cast<int>(bc.per_patch.size()) != mesh.num_patches())
    throw MissingPatchBC("boundary spec must cover every patch");
  for (const PatchBC& p : bc.per_patch)
    if (!p.value) throw MissingPatchBC("patch without value function");

  const bool pure_neumann = !bc.any_dirichlet();
  Eigen::VectorXd f = pure_neumann ? normalize_neumann(forcing, mesh) : forcing;

  Eigen::VectorXd b = (-f.array() * mesh.cell_volumes.array()).matrix();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(4 * mesh.interior_faces.size() + mesh.boundary_faces.size());

  for (const InteriorFace& face : mesh.interior_faces) {
    const double da = coeff.values(face.owner);
    const double db = coeff.values(face.neighbor);
    // Harmonic mean at the face; exact for equal values.
    const double de = da == db ? da : 2.0 * da * db / (da + db);
    const double w = de * face.area / face.normal_distance;
    trips.emplace_back(face.owner, face.owner, w);
    trips.emplace_back(face.neighbor, face.neighbor, w);
    trips.emplace_back(face.owner, face.neighbor, -w);
    trips.emplace_back(face.neighbor, face.owner, -w);
  }

  for (const BoundaryFace& face : mesh.boundary_faces) {
    const PatchBC& pbc = bc.per_patch[face.patch_id];
    const double de = coeff.values(face.owner);
    if (pbc.type == BCType::Dirichlet) {
      const double w = de * face.area / face.normal_distance;
      trips.emplace_back(face.owner, face.owner, w);
      b(face.owner) += w * pbc.value(face.centroid);
    } else {
      b(face.owner) += de * face.area * pbc.value(face.centroid);
    }
  }

  SpMat A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  LinearSystem sys;
  sys.matrix = std::move(A);
  sys.rhs = std::move(b);
  sys.pure_neumann = pure_neumann;
  if (pure_neumann) sys = pin_reference(sys, 0);
  return sys;
}

LinearSystem assemble(const Mesh& mesh, const BoundarySpec& bc, const Eigen::VectorXd& forcing) {
  return assemble(mesh, bc, forcing, CoefficientField::constant(mesh.num_cells()));
}

LinearSystem pin_reference(const LinearSystem& system, int cell) {
  const int n = system.size();
  if (cell < 0 || cell >= n) throw InvalidArgument("pin cell out of range");
  if (system.pinned_cell >= 0) throw PinOnDirichletSystem("system already pinned");

  // A pinnable system has the constant vector in its null space.
  const Eigen::VectorXd row_sums = system.matrix * Eigen::VectorXd::Ones(n);
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(system.matrix.coeff(i, i)));
  if (row_sums.cwiseAbs().maxCoeff() > 1e-10 * max_diag)
    throw PinOnDirichletSystem("matrix has no constant null vector; nothing to pin");

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(system.matrix.nonZeros()) + 1);
  for (int r = 0; r < system.matrix.outerSize(); ++r)
    for (SpMat::InnerIterator it(system.matrix, r); it; ++it) {
      if (it.row() == cell || it.col() == cell) continue;
      trips.emplace_back(it.row(), it.col(), it.value());
    }
  trips.emplace_back(cell, cell, 1.0);

  LinearSystem out;
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(trips.begin(), trips.end());
  out.matrix.makeCompressed();
  out.rhs = system.rhs;
  out.rhs(cell) = 0.0;
  out.pinned_cell = cell;
  out.pure_neumann = system.pure_neumann;
  return out;
}

}  // namespace fvlab
