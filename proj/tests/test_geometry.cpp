#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "fvlab/geometry.hpp"

using namespace fvlab;

namespace {
const double L = kDefaultDomainLength;
}

TEST_CASE("category zero is the intact square") {
  const GeometrySpec s = sample_corner_removed_square(0, 1);
  CHECK(s.removed.empty());
  CHECK(contains(s, {0.5 * L, 0.5 * L, 0.0}));
}

TEST_CASE("category four removes four rectangles with bounded sides") {
  const GeometrySpec s = sample_corner_removed_square(4, 7);
  REQUIRE(s.removed.size() == 4);
  bool corner_used[4] = {false, false, false, false};
  for (const CornerRect& r : s.removed) {
    CHECK(r.width >= 0.1 * L);
    CHECK(r.width <= 0.4 * L);
    CHECK(r.height >= 0.1 * L);
    CHECK(r.height <= 0.4 * L);
    corner_used[r.corner] = true;
  }
  for (bool u : corner_used) CHECK(u);
}

TEST_CASE("cube containment holds over many seeds") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const GeometrySpec s = sample_cube_with_hole(seed);
    const double r = 0.5 * s.cyl_diameter;
    CHECK(s.cyl_diameter >= 0.1 * L);
    CHECK(s.cyl_diameter <= 0.3 * L);
    // containment re-checked from the raw parameters
    CHECK(s.cyl_center.x() - r >= 0.0);
    CHECK(s.cyl_center.x() + r <= L);
    CHECK(s.cyl_center.y() - r >= 0.0);
    CHECK(s.cyl_center.y() + r <= L);
  }
}

TEST_CASE("plate containment holds over many seeds") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const GeometrySpec s = sample_perforated_plate(seed);
    CHECK(s.cavity_center.x() - 0.5 * s.cavity_width >= 0.0);
    CHECK(s.cavity_center.x() + 0.5 * s.cavity_width <= L);
    CHECK(s.cavity_center.y() - 0.5 * s.cavity_height >= 0.0);
    CHECK(s.cavity_center.y() + 0.5 * s.cavity_height <= L);
  }
}

TEST_CASE("sampling is bit-deterministic in the seed") {
  for (int k = 0; k <= 4; ++k) {
    const GeometrySpec a = sample_corner_removed_square(k, 99);
    const GeometrySpec b = sample_corner_removed_square(k, 99);
    REQUIRE(a.removed.size() == b.removed.size());
    for (std::size_t i = 0; i < a.removed.size(); ++i) {
      CHECK(a.removed[i].corner == b.removed[i].corner);
      CHECK(a.removed[i].width == b.removed[i].width);
      CHECK(a.removed[i].height == b.removed[i].height);
    }
  }
  const GeometrySpec c1 = sample_cube_with_hole(5), c2 = sample_cube_with_hole(5);
  CHECK(c1.cyl_diameter == c2.cyl_diameter);
  CHECK(c1.cyl_center == c2.cyl_center);
}

TEST_CASE("rejects bad category and tampered parameters") {
  CHECK_THROWS_AS(sample_corner_removed_square(5, 1), InvalidGeometry);
  CHECK_THROWS_AS(sample_corner_removed_square(-1, 1), InvalidGeometry);

  GeometrySpec bad = sample_cube_with_hole(3);
  bad.cyl_center.x() = 0.0;  // cylinder pokes out of the cube
  CHECK_THROWS_AS(validate(bad), InvalidGeometry);

  GeometrySpec wide = sample_perforated_plate(3);
  wide.cavity_width = 0.6 * L;
  CHECK_THROWS_AS(validate(wide), InvalidGeometry);
}

TEST_CASE("containment predicate on the three families") {
  const GeometrySpec square = sample_corner_removed_square(4, 11);
  for (const CornerRect& r : square.removed) {
    const double px = (r.corner & 1) ? L - 0.5 * r.width : 0.5 * r.width;
    const double py = (r.corner & 2) ? L - 0.5 * r.height : 0.5 * r.height;
    CHECK_FALSE(contains(square, {px, py, 0.0}));
  }
  CHECK(contains(square, {0.5 * L, 0.5 * L, 0.0}));
  CHECK_FALSE(contains(square, {-0.01, 0.5 * L, 0.0}));

  const GeometrySpec cube = sample_cube_with_hole(3);
  CHECK_FALSE(contains(cube, {cube.cyl_center.x(), cube.cyl_center.y(), 0.5 * L}));
  CHECK_FALSE(contains(cube, {0.5 * L, 0.5 * L, 1.5 * L}));

  const GeometrySpec plate = sample_perforated_plate(9);
  CHECK_FALSE(contains(plate, {plate.cavity_center.x(), plate.cavity_center.y(), 0.0}));
}

TEST_CASE("JSON round trip preserves the spec exactly") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const GeometrySpec a = sample_corner_removed_square(3, seed);
    const GeometrySpec b = geometry_from_json(geometry_to_json(a));
    CHECK(a.domain_length == b.domain_length);
    CHECK(a.base_resolution == b.base_resolution);
    CHECK(a.seed == b.seed);
    REQUIRE(a.removed.size() == b.removed.size());
    for (std::size_t i = 0; i < a.removed.size(); ++i) {
      CHECK(a.removed[i].width == b.removed[i].width);
      CHECK(a.removed[i].height == b.removed[i].height);
    }

    const GeometrySpec p = sample_perforated_plate(seed);
    const GeometrySpec q = geometry_from_json(geometry_to_json(p));
    CHECK(p.cavity_width == q.cavity_width);
    CHECK(p.cavity_center == q.cavity_center);
  }
}
