#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "dwell/scattering.hpp"

namespace dwell {

// Resonance pole E = E_r - i Gamma/2 of the S-matrix, i.e. a zero of W(E).
struct Pole {
  Complex energy;
  int order = 1;
  double residual = 0.0;  // |W(energy)| at the accepted root

  double e_r() const { return energy.real(); }
  double gamma() const { return -2.0 * energy.imag(); }
};

// Rectangle in the lower half of the complex energy plane to scan for poles.
struct SearchRegion {
  double re_min = 1.0;
  double re_max = 4.0;
  double im_min = -1.0;  // = -Gamma_max/2
  double im_max = 0.0;
  double density = 20.0;  // seed grid points per unit length

  void validate() const;  // throws std::invalid_argument

  // re range closed, im range half-open [im_min, im_max): resonances only,
  // never a real-axis or upper-half-plane point
  bool contains(Complex e) const {
    return e.real() >= re_min && e.real() <= re_max && e.imag() >= im_min &&
           e.imag() < im_max;
  }
};

struct Rectangle {
  double re_min, re_max, im_min, im_max;
};

// A zero of W lies on (or numerically on) the requested contour; the caller
// must shrink or shift it.
struct ContourError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The argument-principle count over a region disagrees with the located
// roots; nothing was silently dropped, the search is reported as failed.
struct PoleCountMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Number of zeros of W inside the contour, counted with multiplicity, via
// adaptive accumulation of the phase of W along the boundary. Exact integer;
// throws ContourError when |W| on the contour is too small to trust.
int winding_count(const PotentialSpec& spec, const Rectangle& contour);
int winding_count_circle(const PotentialSpec& spec, Complex center, double radius);

struct RefineResult {
  bool converged = false;
  Pole pole;  // best iterate even when not converged
  int iterations = 0;
};

// Newton iteration on W from the given guess, with the exact derivative of
// the propagated solution. Roots listed in `deflate` are divided out, which
// lets a second member of a close pair be recovered. Falls back to a
// derivative-free simplex descent on |W|^2 when Newton stalls, then re-enters
// Newton. Convergence: |step| < 1e-12 scale and |W| < 1e-10 of the local
// scale of W.
RefineResult refine(const PotentialSpec& spec, Complex guess,
                    std::span<const Complex> deflate = {});

struct PoleSearch {
  std::vector<Pole> poles;  // sorted by increasing Re(E)
  int winding = 0;          // argument-principle count over the region
  int seeds_failed = 0;     // seeds whose refinement did not converge
};

// Scan |W| on a grid over the region, refine every grid-local minimum,
// deduplicate (1e-9), recover close pairs by deflation, classify orders by
// small-contour winding, and cross-check the total against the argument
// principle over the region boundary. Count mismatch throws
// PoleCountMismatch; a pole sitting on the region boundary throws
// ContourError.
PoleSearch find_poles(const PotentialSpec& spec, const SearchRegion& region);

}  // namespace dwell
