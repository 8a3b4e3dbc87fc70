#pragma once

#include <functional>

#include "dpgmg/lac.hpp"

namespace dpgmg {

/// Impedance boundary data u0 at (x, y); (nx, ny) is the outward unit normal
/// of the boundary face.
using BoundaryLoad = std::function<Cplx(double x, double y, double nx, double ny)>;

/// First-order acoustic system i*omega*p + div u = 0, i*omega*u + grad p = 0
/// on (0,1)^2 with impedance condition p/Z - u.n = u0 on the boundary.
struct ProblemConfig {
  double omega = 2.0 * 3.14159265358979323846;
  double impedance = 1.0;  ///< Z
  double alpha = 1.0;      ///< zeroth-order weight in the test inner product
  int delta_p = 1;         ///< test order enrichment
  double wavespeed = 1.0;
  BoundaryLoad boundary_load;

  void validate() const;
};

/// Exact plane wave p = exp(-i omega/c d.x), u = d p with |d| = 1.
struct PlaneWave {
  double omega, wavespeed, dx, dy;
  Cplx p(double x, double y) const;
  Cplx ux(double x, double y) const;
  Cplx uy(double x, double y) const;
};

/// Impedance data of the exact plane wave: u0 = p/Z - u.n.
BoundaryLoad plane_wave_load(const PlaneWave& pw, double impedance);

/// Paraxial Gaussian beam entering through the face x = 0, propagating in +x,
/// centered at y = center with waist radius `waist`; homogeneous data on the
/// other faces.
BoundaryLoad gaussian_beam_load(double omega, double wavespeed, double impedance, double center,
                                double waist);

BoundaryLoad zero_load();

}  // namespace dpgmg
