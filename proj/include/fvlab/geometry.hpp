#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "fvlab/errors.hpp"

#include <nlohmann/json_fwd.hpp>

namespace fvlab {

inline constexpr double kDefaultDomainLength = 2.0 * std::numbers::pi;

enum class GeometryFamily { CornerRemovedSquare, CubeWithCylindricalHole, PerforatedPlate };

std::string family_name(GeometryFamily f);
GeometryFamily family_from_name(const std::string& name);

/// Rectangle anchored at one of the four square corners.
/// Corner ids: 0 = (xmin,ymin), 1 = (xmax,ymin), 2 = (xmin,ymax), 3 = (xmax,ymax).
struct CornerRect {
  int corner = 0;
  double width = 0.0;
  double height = 0.0;
};

/// Parametric description of one domain instance. Only the fields of the
/// active family are meaningful.
struct GeometrySpec {
  GeometryFamily family = GeometryFamily::CornerRemovedSquare;
  double domain_length = kDefaultDomainLength;
  int base_resolution = 128;
  std::uint64_t seed = 0;

  std::vector<CornerRect> removed;  // CornerRemovedSquare

  double cyl_diameter = 0.0;  // CubeWithCylindricalHole; axis along z, full height
  Eigen::Vector2d cyl_center = Eigen::Vector2d::Zero();

  double cavity_width = 0.0;  // PerforatedPlate
  double cavity_height = 0.0;
  Eigen::Vector2d cavity_center = Eigen::Vector2d::Zero();

  int dim() const { return family == GeometryFamily::CubeWithCylindricalHole ? 3 : 2; }
};

GeometrySpec sample_corner_removed_square(int k, std::uint64_t seed,
                                          double length = kDefaultDomainLength,
                                          int resolution = 128);
GeometrySpec sample_cube_with_hole(std::uint64_t seed, double length = kDefaultDomainLength,
                                   int resolution = 48);
GeometrySpec sample_perforated_plate(std::uint64_t seed, double length = kDefaultDomainLength,
                                     int resolution = 128);

/// Family dispatcher used by the CLI; `category` is the removed-corner count
/// and is ignored by the other two families.
GeometrySpec sample_geometry(GeometryFamily family, int category, std::uint64_t seed,
                             double length = kDefaultDomainLength, int resolution = 0);

/// Checks every invariant of the spec (ranges, containment); throws InvalidGeometry.
void validate(const GeometrySpec& spec);

/// True iff the point lies in the closed base square/cube and outside the open
/// interior of every subtracted shape.
bool contains(const GeometrySpec& spec, const Eigen::Vector3d& p);

nlohmann::json geometry_to_json(const GeometrySpec& spec);
GeometrySpec geometry_from_json(const nlohmann::json& j);
void save_geometry(const GeometrySpec& spec, const std::string& path);
GeometrySpec load_geometry(const std::string& path);

}  // namespace fvlab
