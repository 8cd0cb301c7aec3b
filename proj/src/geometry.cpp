#include "fvlab/geometry.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fvlab/rng.hpp"

namespace fvlab {

std::string family_name(GeometryFamily f) {
  switch (f) {
    case GeometryFamily::CornerRemovedSquare: return "corner_removed_square";
    case GeometryFamily::CubeWithCylindricalHole: return "cube_with_cylindrical_hole";
    case GeometryFamily::PerforatedPlate: return "perforated_plate";
  }
  throw InvalidArgument("unknown geometry family");
}

GeometryFamily family_from_name(const std::string& name) {
  if (name == "corner_removed_square") return GeometryFamily::CornerRemovedSquare;
  if (name == "cube_with_cylindrical_hole") return GeometryFamily::CubeWithCylindricalHole;
  if (name == "perforated_plate") return GeometryFamily::PerforatedPlate;
  throw InvalidArgument("unknown geometry family '" + name + "'");
}

GeometrySpec sample_corner_removed_square(int k, std::uint64_t seed, double length,
                                          int resolution) {
  if (k < 0 || k > 4) throw InvalidGeometry("removed-corner count must be in {0..4}");
  GeometrySpec s;
  s.family = GeometryFamily::CornerRemovedSquare;
  s.domain_length = length;
  s.base_resolution = resolution;
  s.seed = seed;

  // Corners chosen uniformly without replacement; rectangles stored in fixed
  // corner order so the spec is reproducible independently of the draw order.
  std::array<int, 4> corners{0, 1, 2, 3};
  rng::Stream pick(seed, "corner_pick");
  for (int i = 0; i < 3; ++i) {
    const int j = i + static_cast<int>(pick.below(4 - i));
    std::swap(corners[i], corners[j]);
  }
  std::vector<int> chosen(corners.begin(), corners.begin() + k);
  std::sort(chosen.begin(), chosen.end());

  rng::Stream size(seed, "corner_size");
  for (int c : chosen) {
    CornerRect r;
    r.corner = c;
    r.width = size.uniform(0.1 * length, 0.4 * length);
    r.height = size.uniform(0.1 * length, 0.4 * length);
    s.removed.push_back(r);
  }
  validate(s);
  return s;
}

GeometrySpec sample_cube_with_hole(std::uint64_t seed, double length, int resolution) {
  GeometrySpec s;
  s.family = GeometryFamily::CubeWithCylindricalHole;
  s.domain_length = length;
  s.base_resolution = resolution;
  s.seed = seed;

  rng::Stream st(seed, "cylinder");
  s.cyl_diameter = st.uniform(0.1 * length, 0.3 * length);
  const double r = 0.5 * s.cyl_diameter;
  s.cyl_center.x() = st.uniform(r, length - r);
  s.cyl_center.y() = st.uniform(r, length - r);
  validate(s);
  return s;
}

GeometrySpec sample_perforated_plate(std::uint64_t seed, double length, int resolution) {
  GeometrySpec s;
  s.family = GeometryFamily::PerforatedPlate;
  s.domain_length = length;
  s.base_resolution = resolution;
  s.seed = seed;

  rng::Stream st(seed, "cavity");
  s.cavity_width = st.uniform(0.1 * length, 0.4 * length);
  s.cavity_height = st.uniform(0.1 * length, 0.4 * length);
  s.cavity_center.x() = st.uniform(0.5 * s.cavity_width, length - 0.5 * s.cavity_width);
  s.cavity_center.y() = st.uniform(0.5 * s.cavity_height, length - 0.5 * s.cavity_height);
  validate(s);
  return s;
}

GeometrySpec sample_geometry(GeometryFamily family, int category, std::uint64_t seed,
                             double length, int resolution) {
  switch (family) {
    case GeometryFamily::CornerRemovedSquare:
      return sample_corner_removed_square(category, seed, length,
                                          resolution > 0 ? resolution : 128);
    case GeometryFamily::CubeWithCylindricalHole:
      return sample_cube_with_hole(seed, length, resolution > 0 ? resolution : 48);
    case GeometryFamily::PerforatedPlate:
      return sample_perforated_plate(seed, length, resolution > 0 ? resolution : 128);
  }
  throw InvalidArgument("unknown geometry family");
}

void validate(const GeometrySpec& s) {
  const double L = s.domain_length;
  if (!(L > 0.0)) throw InvalidGeometry("domain_length must be positive");
  if (s.base_resolution < 1) throw InvalidGeometry("base_resolution must be >= 1");

  auto in_range = [&](double v, double lo, double hi) {
    const double tol = 1e-12 * L;
    return v >= lo - tol && v <= hi + tol;
  };

  switch (s.family) {
    case GeometryFamily::CornerRemovedSquare: {
      if (s.removed.size() > 4) throw InvalidGeometry("at most four removed corners");
      std::array<bool, 4> used{false, false, false, false};
      for (const CornerRect& r : s.removed) {
        if (r.corner < 0 || r.corner > 3) throw InvalidGeometry("corner id must be in {0..3}");
        if (used[r.corner]) throw InvalidGeometry("duplicate corner id");
        used[r.corner] = true;
        if (!in_range(r.width, 0.1 * L, 0.4 * L) || !in_range(r.height, 0.1 * L, 0.4 * L))
          throw InvalidGeometry("removed rectangle side must lie in [0.1L, 0.4L]");
      }
      break;
    }
    case GeometryFamily::CubeWithCylindricalHole: {
      if (!in_range(s.cyl_diameter, 0.1 * L, 0.3 * L))
        throw InvalidGeometry("cylinder diameter must lie in [0.1L, 0.3L]");
      const double r = 0.5 * s.cyl_diameter;
      if (!in_range(s.cyl_center.x(), r, L - r) || !in_range(s.cyl_center.y(), r, L - r))
        throw InvalidGeometry("cylinder must be fully contained in the cube");
      break;
    }
    case GeometryFamily::PerforatedPlate: {
      if (!in_range(s.cavity_width, 0.1 * L, 0.4 * L) ||
          !in_range(s.cavity_height, 0.1 * L, 0.4 * L))
        throw InvalidGeometry("cavity side must lie in [0.1L, 0.4L]");
      if (!in_range(s.cavity_center.x(), 0.5 * s.cavity_width, L - 0.5 * s.cavity_width) ||
          !in_range(s.cavity_center.y(), 0.5 * s.cavity_height, L - 0.5 * s.cavity_height))
        throw InvalidGeometry("cavity must be fully contained in the square");
      break;
    }
  }
}

bool contains(const GeometrySpec& s, const Eigen::Vector3d& p) {
  const double L = s.domain_length;
  const int d = s.dim();
  for (int a = 0; a < d; ++a)
    if (p[a] < 0.0 || p[a] > L) return false;

  // Subtracted shapes remove their open interior; points on a shape edge
  // count as part of the (closed) domain.
  switch (s.family) {
    case GeometryFamily::CornerRemovedSquare: {
      for (const CornerRect& r : s.removed) {
        const double x0 = (r.corner & 1) ? L - r.width : 0.0;
        const double x1 = (r.corner & 1) ? L : r.width;
        const double y0 = (r.corner & 2) ? L - r.height : 0.0;
        const double y1 = (r.corner & 2) ? L : r.height;
        if (p.x() > x0 && p.x() < x1 && p.y() > y0 && p.y() < y1) return false;
      }
      return true;
    }
    case GeometryFamily::CubeWithCylindricalHole: {
      const double rr = 0.25 * s.cyl_diameter * s.cyl_diameter;
      const double dx = p.x() - s.cyl_center.x();
      const double dy = p.y() - s.cyl_center.y();
      return dx * dx + dy * dy >= rr;
    }
    case GeometryFamily::PerforatedPlate: {
      const double x0 = s.cavity_center.x() - 0.5 * s.cavity_width;
      const double x1 = s.cavity_center.x() + 0.5 * s.cavity_width;
      const double y0 = s.cavity_center.y() - 0.5 * s.cavity_height;
      const double y1 = s.cavity_center.y() + 0.5 * s.cavity_height;
      return !(p.x() > x0 && p.x() < x1 && p.y() > y0 && p.y() < y1);
    }
  }
  return false;
}

nlohmann::json geometry_to_json(const GeometrySpec& s) {
  nlohmann::json j;
  j["family"] = family_name(s.family);
  j["domain_length"] = s.domain_length;
  j["base_resolution"] = s.base_resolution;
  j["seed"] = s.seed;
  nlohmann::json params;
  switch (s.family) {
    case GeometryFamily::CornerRemovedSquare: {
      nlohmann::json rects = nlohmann::json::array();
      for (const CornerRect& r : s.removed)
        rects.push_back({{"corner", r.corner}, {"width", r.width}, {"height", r.height}});
      params["removed_corners"] = rects;
      break;
    }
    case GeometryFamily::CubeWithCylindricalHole:
      params["diameter"] = s.cyl_diameter;
      params["center"] = {s.cyl_center.x(), s.cyl_center.y()};
      break;
    case GeometryFamily::PerforatedPlate:
      params["cavity_width"] = s.cavity_width;
      params["cavity_height"] = s.cavity_height;
      params["cavity_center"] = {s.cavity_center.x(), s.cavity_center.y()};
      break;
  }
  j["params"] = params;
  return j;
}

GeometrySpec geometry_from_json(const nlohmann::json& j) {
  GeometrySpec s;
  s.family = family_from_name(j.at("family").get<std::string>());
  s.domain_length = j.at("domain_length").get<double>();
  s.base_resolution = j.at("base_resolution").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  const nlohmann::json& params = j.at("params");
  switch (s.family) {
    case GeometryFamily::CornerRemovedSquare:
      for (const auto& r : params.at("removed_corners")) {
        CornerRect cr;
        cr.corner = r.at("corner").get<int>();
        cr.width = r.at("width").get<double>();
        cr.height = r.at("height").get<double>();
        s.removed.push_back(cr);
      }
      break;
    case GeometryFamily::CubeWithCylindricalHole:
      s.cyl_diameter = params.at("diameter").get<double>();
      s.cyl_center.x() = params.at("center").at(0).get<double>();
      s.cyl_center.y() = params.at("center").at(1).get<double>();
      break;
    case GeometryFamily::PerforatedPlate:
      s.cavity_width = params.at("cavity_width").get<double>();
      s.cavity_height = params.at("cavity_height").get<double>();
      s.cavity_center.x() = params.at("cavity_center").at(0).get<double>();
      s.cavity_center.y() = params.at("cavity_center").at(1).get<double>();
      break;
  }
  validate(s);
  return s;
}

void save_geometry(const GeometrySpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << geometry_to_json(spec).dump(2) << "\n";
}

GeometrySpec load_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return geometry_from_json(j);
}

}  // namespace fvlab
