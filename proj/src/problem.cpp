#include "dpgmg/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace dpgmg {

void ProblemConfig::validate() const {
  if (!(omega > 0)) throw std::invalid_argument("omega must be positive");
  if (!(impedance > 0)) throw std::invalid_argument("impedance must be positive");
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  if (delta_p < 1) throw std::invalid_argument("delta_p must be >= 1");
  if (!(wavespeed > 0)) throw std::invalid_argument("wavespeed must be positive");
}

Cplx PlaneWave::p(double x, double y) const {
  const double k = omega / wavespeed;
  return std::exp(Cplx(0, -k * (dx * x + dy * y)));
}
Cplx PlaneWave::ux(double x, double y) const { return dx * p(x, y); }
Cplx PlaneWave::uy(double x, double y) const { return dy * p(x, y); }

BoundaryLoad plane_wave_load(const PlaneWave& pw, double impedance) {
  return [pw, impedance](double x, double y, double nx, double ny) {
    const Cplx p = pw.p(x, y);
    return p / impedance - (pw.ux(x, y) * nx + pw.uy(x, y) * ny);
  };
}

BoundaryLoad gaussian_beam_load(double omega, double wavespeed, double impedance, double center,
                                double waist) {
  // At the waist plane x=0: p = exp(-r^2/w0^2), and the paraxial x-derivative
  // dp/dx = -i (k + k r^2/(2 xr^2) - 1/(2 xr)) p with xr = k w0^2 / 2.
  // u = -grad p / (i omega); on the face x=0 the outward normal is (-1,0),
  // so u.n = -u_x and u0 = p/Z - u.n.
  const double k = omega / wavespeed;
  const double xr = 0.5 * k * waist * waist;
  return [=](double x, double y, double nx, double ny) -> Cplx {
    if (!(nx < -0.5)) return Cplx(0, 0);  // only the face x = 0 is driven
    (void)x;
    const double r = y - center;
    const Cplx p = std::exp(Cplx(-r * r / (waist * waist), 0));
    const Cplx dpdx = Cplx(0, -(k + k * r * r / (2 * xr * xr) - 1.0 / (2 * xr))) * p;
    const Cplx ux = -dpdx / Cplx(0, omega);
    const Cplx un = -ux;
    (void)ny;
    return p / impedance - un;
  };
}

BoundaryLoad zero_load() {
  return [](double, double, double, double) { return Cplx(0, 0); };
}

}  // namespace dpgmg
