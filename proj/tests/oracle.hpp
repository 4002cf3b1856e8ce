#pragma once

#include "dwell/potential.hpp"

namespace dwell::oracle {

// Brute-force cross-checks for the exact solver. Everything here integrates
// the ODE on a grid; none of it shares a code path with the closed-form
// transfer steps in the library.

// psi and psi' at the last potential edge from Numerov integration with step
// ~h (each segment gets a uniform subgrid so edges land on nodes).
struct GridBoundary {
  double psi;
  double dpsi;
};
GridBoundary numerov_boundary_state(const PotentialSpec& spec, double e, double h);

// Phase shift mod pi from the Numerov solution, extracted from psi at two
// exterior points a quarter wavelength apart. Error O(h^4). Rejects steps
// with sqrt(|2(E-V)|) h >= 0.5.
double numerov_phase_shift(const PotentialSpec& spec, double e, double h);

// integral_a^b |psi|^2 dx with unit exterior amplitude, by composite Simpson
// on the Numerov grid, refined until two successive grids agree to tol.
// b may extend past the last edge into the exterior.
double quadrature_occupation(const PotentialSpec& spec, double e, double a,
                             double b, double tol = 1e-9);

}  // namespace dwell::oracle
