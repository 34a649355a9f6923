#pragma once

#include <array>

#include "dpc/selfenergy.hpp"

namespace dpc {

struct OracleResult {
  double energy = 0.0;  // J
  // Set when the branch displacement is finer than the sub-voxel sampling
  // pitch, so the density difference is not actually resolved.
  bool under_resolved = false;
  int resolution = 0;
  std::array<int, 3> grid{};  // unpadded voxel counts
};

// Unit-cube self-interaction integral, double integral over [0,1]^3 x [0,1]^3
// of 1/|x - y|.
double unit_cube_self_integral();

// Brute-force E_g = (G/2) sum_ij dm_i dm_j / |x_i - x_j| over a voxelisation of
// the branch-1-minus-branch-2 density of two displaced uniform spheres.
//
// `resolution` is voxels per radius (>= 8). Boundary voxels get fractional
// occupancy from `subsamples`^3 point tests, and each sphere is renormalised
// to exactly the body mass. The i == j term uses the uniform-cube
// self-potential. The pair sum is evaluated as a zero-padded FFT convolution,
// which is the same discrete sum in a fixed, partition-free order.
OracleResult self_energy_numeric_oracle(const SuperpositionGeometry& geometry,
                                        int resolution = 24,
                                        const PhysicalConstants& c = {},
                                        int subsamples = 4);

}  // namespace dpc
