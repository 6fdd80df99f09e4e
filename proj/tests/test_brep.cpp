#include "rezone/brep.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace rezone;
using namespace rezone::tests;

TEST_CASE("unit cube parses with six faces, six planes, unit box") {
  BRep b = parse_brep(unit_cube_doc());
  CHECK(b.faces.size() == 6);
  CHECK(b.planes.size() == 6);
  for (int k = 0; k < 3; ++k) {
    CHECK(b.aabb_min[k] == 0);
    CHECK(b.aabb_max[k] == 1);
  }
  CHECK(b.signed_volume() == Rat(1));
}

TEST_CASE("open shell is rejected as not watertight") {
  nlohmann::json doc = unit_cube_doc();
  doc["faces"].erase(5);
  CHECK_THROWS_AS(parse_brep(doc), BRepError);
  try {
    parse_brep(doc);
  } catch (const BRepError& e) {
    CHECK(e.kind == BRepErrorKind::NotWatertight);
  }
}

TEST_CASE("lifted vertex is rejected as non-planar") {
  nlohmann::json doc = unit_cube_doc();
  doc["vertices"][6] = {1, 1, "3/2"};  // breaks the planar quads through vertex 6
  try {
    parse_brep(doc);
    CHECK(false);
  } catch (const BRepError& e) {
    CHECK(e.kind == BRepErrorKind::NonPlanarFace);
  }
}

TEST_CASE("degenerate faces are rejected") {
  nlohmann::json doc = unit_cube_doc();
  doc["faces"][0] = {{"loop", {0, 3}}};
  try {
    parse_brep(doc);
    CHECK(false);
  } catch (const BRepError& e) {
    CHECK(e.kind == BRepErrorKind::DegenerateFace);
  }
}

TEST_CASE("float coordinates are rejected") {
  nlohmann::json doc = unit_cube_doc();
  doc["vertices"][0] = {0.5, 0, 0};
  CHECK_THROWS_AS(parse_brep(doc), BRepError);
}

TEST_CASE("serialization round trip is bit exact") {
  for (const nlohmann::json& doc :
       {unit_cube_doc(), l_prism_doc(), tetrahedron_doc(), plate_with_hole_doc()}) {
    BRep b = parse_brep(doc);
    BRep again = parse_brep(serialize_brep(b));
    CHECK(b == again);
  }
}

TEST_CASE("plane deduplication leaves no duplicate canonical coefficients") {
  BRep b = parse_brep(plate_with_hole_doc());
  for (std::size_t i = 0; i < b.planes.size(); ++i)
    for (std::size_t j = i + 1; j < b.planes.size(); ++j)
      CHECK_FALSE(b.planes[i] == b.planes[j]);
  CHECK(b.planes.size() == 10);  // x:0..3 sides, y sides, z caps
}

TEST_CASE("orientation fixing recovers flipped faces") {
  nlohmann::json doc = unit_cube_doc();
  auto loop = doc["faces"][2]["loop"].get<std::vector<int>>();
  std::reverse(loop.begin(), loop.end());
  doc["faces"][2]["loop"] = loop;
  BRep b = parse_brep(doc);
  CHECK(b.signed_volume() == Rat(1));
}

TEST_CASE("cube has three face loops with canonical axis directions") {
  BRep b = parse_brep(unit_cube_doc());
  std::vector<FaceLoop> loops = find_face_loops(b);
  REQUIRE(loops.size() == 3);
  std::set<std::array<std::string, 3>> dirs;
  for (const FaceLoop& fl : loops) {
    CHECK(fl.face_ids.size() == 4);
    CHECK(check_face_loop(b, fl));
    dirs.insert({fl.direction[0].str(), fl.direction[1].str(), fl.direction[2].str()});
  }
  CHECK(dirs == std::set<std::array<std::string, 3>>{
                    {"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}});
}

TEST_CASE("L-prism has one loop of its six side faces") {
  BRep b = parse_brep(l_prism_doc());
  std::vector<FaceLoop> loops = find_face_loops(b);
  REQUIRE(loops.size() == 1);
  CHECK(loops[0].face_ids.size() == 6);
  CHECK(loops[0].direction[2] == 1);
  CHECK(loops[0].direction[0] == 0);
  CHECK(check_face_loop(b, loops[0]));
}

TEST_CASE("tetrahedron has no face loops") {
  BRep b = parse_brep(tetrahedron_doc());
  CHECK(find_face_loops(b).empty());
}

TEST_CASE("face loops match brute-force cycle enumeration") {
  for (const nlohmann::json& doc : {unit_cube_doc(), l_prism_doc(), tetrahedron_doc()}) {
    BRep b = parse_brep(doc);
    auto expect = oracles::brute_force_face_loops(b);
    std::set<std::pair<std::set<int>, std::array<std::string, 3>>> got;
    for (const FaceLoop& fl : find_face_loops(b)) {
      got.insert({std::set<int>(fl.face_ids.begin(), fl.face_ids.end()),
                  {fl.direction[0].str(), fl.direction[1].str(), fl.direction[2].str()}});
    }
    CHECK(got == expect);
  }
}

TEST_CASE("find_face_loops output order is deterministic") {
  BRep b = parse_brep(unit_cube_doc());
  auto a = find_face_loops(b);
  auto c = find_face_loops(b);
  REQUIRE(a.size() == c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].face_ids == c[i].face_ids);
    CHECK(compare_vec3i(a[i].direction, c[i].direction) == 0);
  }
}
