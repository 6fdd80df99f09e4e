#pragma once

#include "rezone/brep.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <functional>

namespace rezone::tests {

// 8 vertices, 6 quads, counter-clockwise seen from outside.
inline nlohmann::json unit_cube_doc() {
  return nlohmann::json::parse(R"({
    "vertices": [[0,0,0],[1,0,0],[1,1,0],[0,1,0],[0,0,1],[1,0,1],[1,1,1],[0,1,1]],
    "faces": [
      {"loop": [0,3,2,1]}, {"loop": [4,5,6,7]},
      {"loop": [0,1,5,4]}, {"loop": [2,3,7,6]},
      {"loop": [0,4,7,3]}, {"loop": [1,2,6,5]}
    ]
  })");
}

// 2x2x1 block minus the [1,2]x[1,2]x[0,1] corner: hexagonal top and bottom,
// six side quads.
inline nlohmann::json l_prism_doc() {
  return nlohmann::json::parse(R"({
    "vertices": [
      [0,0,0],[2,0,0],[2,1,0],[1,1,0],[1,2,0],[0,2,0],
      [0,0,1],[2,0,1],[2,1,1],[1,1,1],[1,2,1],[0,2,1]
    ],
    "faces": [
      {"loop": [0,5,4,3,2,1]},
      {"loop": [6,7,8,9,10,11]},
      {"loop": [0,1,7,6]},
      {"loop": [1,2,8,7]},
      {"loop": [2,3,9,8]},
      {"loop": [3,4,10,9]},
      {"loop": [4,5,11,10]},
      {"loop": [5,0,6,11]}
    ]
  })");
}

inline nlohmann::json tetrahedron_doc() {
  return nlohmann::json::parse(R"({
    "vertices": [[0,0,0],[1,0,0],[0,1,0],[0,0,1]],
    "faces": [
      {"loop": [0,2,1]}, {"loop": [0,3,2]}, {"loop": [0,1,3]}, {"loop": [1,2,3]}
    ]
  })");
}

// Builds a unit-granularity boundary B-rep document from a cell predicate.
// Every boundary unit square becomes one quad face; always watertight.
inline nlohmann::json cells_to_doc(int nx, int ny, int nz,
                                   const std::function<bool(int, int, int)>& solid) {
  auto at = [&](int x, int y, int z) {
    return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz && solid(x, y, z);
  };
  std::map<std::array<int, 3>, int> ids;
  std::vector<std::array<int, 3>> verts;
  auto vid = [&](int x, int y, int z) {
    std::array<int, 3> p{x, y, z};
    auto [it, ins] = ids.try_emplace(p, static_cast<int>(verts.size()));
    if (ins) verts.push_back(p);
    return it->second;
  };
  std::vector<std::vector<int>> faces;
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y)
      for (int z = 0; z < nz; ++z) {
        if (!at(x, y, z)) continue;
        // +x / -x / +y / -y / +z / -z, quads counter-clockwise from outside.
        if (!at(x + 1, y, z))
          faces.push_back({vid(x + 1, y, z), vid(x + 1, y + 1, z), vid(x + 1, y + 1, z + 1),
                           vid(x + 1, y, z + 1)});
        if (!at(x - 1, y, z))
          faces.push_back(
              {vid(x, y, z), vid(x, y, z + 1), vid(x, y + 1, z + 1), vid(x, y + 1, z)});
        if (!at(x, y + 1, z))
          faces.push_back({vid(x, y + 1, z), vid(x, y + 1, z + 1), vid(x + 1, y + 1, z + 1),
                           vid(x + 1, y + 1, z)});
        if (!at(x, y - 1, z))
          faces.push_back(
              {vid(x, y, z), vid(x + 1, y, z), vid(x + 1, y, z + 1), vid(x, y, z + 1)});
        if (!at(x, y, z + 1))
          faces.push_back({vid(x, y, z + 1), vid(x + 1, y, z + 1), vid(x + 1, y + 1, z + 1),
                           vid(x, y + 1, z + 1)});
        if (!at(x, y, z - 1))
          faces.push_back(
              {vid(x, y, z), vid(x, y + 1, z), vid(x + 1, y + 1, z), vid(x + 1, y, z)});
      }
  nlohmann::json doc;
  auto& vs = doc["vertices"] = nlohmann::json::array();
  for (auto& p : verts) vs.push_back({p[0], p[1], p[2]});
  auto& fs = doc["faces"] = nlohmann::json::array();
  for (auto& f : faces) fs.push_back({{"loop", f}});
  return doc;
}

// 3x3x1 plate with the center cell removed, at unit granularity.
inline nlohmann::json plate_with_hole_doc() {
  return cells_to_doc(3, 3, 1, [](int x, int y, int) { return !(x == 1 && y == 1); });
}

}  // namespace rezone::tests
