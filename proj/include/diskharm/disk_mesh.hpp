#pragma once

#include <vector>

#include "diskharm/disk_param.hpp"
#include "diskharm/mesh.hpp"

namespace dh {

/// Planar mesh of the unit disk (z = 0) with its own disk coordinates.
struct DiskMesh {
  TriMesh mesh;
  DiskParam param;
};

/// Concentric-ring triangulation of the unit disk with target edge length
/// `edge_length`; the outer ring lies on rho = 1.
DiskMesh uniform_disk_mesh(double edge_length);

/// n points of the Vogel sunflower spiral, area-uniform on the unit disk.
std::vector<Vec2> sunflower_points(std::size_t n);

}  // namespace dh
