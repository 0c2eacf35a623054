#pragma once

#include <string>

#include "untangle/mesh.hpp"

namespace untangle {

struct Fixture {
    std::string name;
    MeshPair mesh;
    TargetPolicy policy = TargetPolicy::rest_shape;
};

// n x n cells of the unit square, each split in two triangles. The boundary
// is locked and two interior vertices trade places in the initial map.
[[nodiscard]] Fixture point_swap_square(int n);

// Center vertex surrounded by 12 triangles; nothing locked, equilateral
// targets (720 degrees of target angle around the center).
[[nodiscard]] Fixture triangle_fan_12();

// [-1,1]^3 minus the cube [-1/2,1/2]^3, n cells per side (n divisible by 4),
// six tetrahedra per cell. Both boundaries are locked and the inner one is
// rotated by angle_deg around the z axis in the initial map.
[[nodiscard]] Fixture cavity_cube(int n, double angle_deg);

// nx x ny triangulated bar of height 1; the end columns are locked and the
// initial map stretches it along x by factor.
[[nodiscard]] Fixture stretched_bar(int nx, int ny, double factor);

struct FixtureParams {
    int n = 8;
    double angle_deg = 45.0;
    int ny = 4;
    double factor = 2.0;
};

// name in {point_swap_square, triangle_fan_12, cavity_cube, stretched_bar}.
[[nodiscard]] Fixture generate_fixture(const std::string& name, const FixtureParams& params = {});

}  // namespace untangle
