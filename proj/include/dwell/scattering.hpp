#pragma once

#include <complex>
#include <span>
#include <vector>

#include "dwell/potential.hpp"

namespace dwell {

using Complex = std::complex<double>;

// Value of the regular solution and its derivative at one point. A nontrivial
// solution of a second-order linear ODE never has psi = dpsi = 0.
struct BoundaryState {
  Complex psi;
  Complex dpsi;
};

// Local momentum K = sqrt(2(E - V)), principal branch (Re K >= 0). Real E > V
// gives K real positive, real E < V gives K positive imaginary. For E in the
// fourth quadrant the branch has Im k < 0 in the exterior, which is the
// outgoing (Gamow) condition, so zeros of the pole function found there are
// the resonance poles.
Complex momentum(Complex e, double v);

// Advance the regular solution psi(0)=0, psi'(0)=1 across every segment with
// the exact constant-potential evolution over width d:
//   psi  -> psi cos(Kd) + dpsi sin(Kd)/K
//   dpsi -> -psi K sin(Kd) + dpsi cos(Kd)
// Every matrix entry is an entire function of E (sin(Kd)/K and K sin(Kd) are
// series in K^2), so the map has no branch ambiguity anywhere in the plane.
BoundaryState propagate(const PotentialSpec& spec, Complex e);

// Sine-form coefficients of one segment: psi(x) = a sin(k x + delta). The
// parametrization degenerates as |k| -> 0 (psi linear); a and delta are NaN
// there and boundary-state evaluation must be used instead.
struct SegmentWave {
  Complex k;
  Complex a;
  Complex delta;
};

struct WaveSolution {
  Complex energy;
  // states at x=0 and at every segment right edge (size = segments + 1)
  std::vector<BoundaryState> edge_states;
  std::vector<SegmentWave> segments;
  SegmentWave exterior;     // k = sqrt(2E); delta is the phase shift
  Complex phase_shift;      // exterior delta, principal branch
};

WaveSolution solve_wave(const PotentialSpec& spec, Complex e);

// Scattering phase shift mod pi, reduced to (-pi/2, pi/2]. Requires E > 0.
double phase_shift(const PotentialSpec& spec, double e);

// Phase shift on an energy grid, branch-tracked so the result is continuous
// in E (each value differs from the principal one by a multiple of pi).
// The grid must be fine enough to resolve the variation of delta.
std::vector<double> phase_shift_grid(const PotentialSpec& spec,
                                     std::span<const double> es);

// S(E) = e^{-2ikx4} (psi' + ik psi)/(psi' - ik psi) evaluated at the last
// edge, equal to (1 + i tan delta)/(1 - i tan delta) wherever tan delta
// exists and free of arctangent branch cuts elsewhere. |S| = 1 for real
// E > 0. A non-finite result signals the pole condition (vanishing
// denominator).
Complex s_matrix(const PotentialSpec& spec, Complex e);

// Jost-type function W(E) = psi'(x4) - i k psi(x4), k = momentum(E, 0).
// Analytic for Re E > 0; its zeros are the S-matrix poles.
Complex pole_function(const PotentialSpec& spec, Complex e);

// W together with its exact energy derivative, obtained by propagating
// d/dE of the transfer steps alongside the state.
struct PoleFunctionJet {
  Complex w;
  Complex dw;
};
PoleFunctionJet pole_function_jet(const PotentialSpec& spec, Complex e);

// |1 - i tan delta(E)| = |2 / (S(E) + 1)| computed without forming tan delta,
// so it vanishes exactly at the poles instead of blowing up on the tan grid.
double pole_criterion(const PotentialSpec& spec, Complex e);

// Regular solution evaluated at the given positions (all >= 0).
std::vector<Complex> wavefunction(const PotentialSpec& spec, Complex e,
                                  std::span<const double> xs);

// Occupation probability P = integral_a^b |psi|^2 dx for real E > 0, with
// psi normalized to unit exterior amplitude sin(kx + delta). Closed form:
// the segment-wise antiderivatives are entire functions of K^2. Requires
// 0 <= a <= b <= last edge.
double occupation(const PotentialSpec& spec, double e, double a, double b);

// Same quantity by adaptive Simpson quadrature on |psi(x)|^2. Cross-check
// path for the closed form; the two agree to ~1e-10 in practice.
double occupation_quadrature(const PotentialSpec& spec, double e, double a,
                             double b, double tol = 1e-12);

}  // namespace dwell
