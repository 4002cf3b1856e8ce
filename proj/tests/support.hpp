#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "dwell/scattering.hpp"

// Shared test helpers: random model generators, the textbook arctangent
// phase recursion, and small statistics utilities.
namespace testsup {

inline constexpr double kPi = 3.14159265358979323846;

// distance between two phases identified mod pi
inline double mod_pi_distance(double a, double b) {
  double r = std::remainder(a - b, kPi);
  return std::fabs(r);
}

struct ModelGen {
  std::mt19937 rng;
  explicit ModelGen(unsigned seed) : rng(seed) {}

  dwell::PotentialSpec random_spec(int max_segments = 5) {
    std::uniform_int_distribution<int> nseg(1, max_segments);
    std::uniform_real_distribution<double> width(0.2, 1.6);
    std::uniform_real_distribution<double> height(-2.0, 5.0);
    std::vector<dwell::Segment> segs;
    double edge = 0.0;
    const int n = nseg(rng);
    for (int i = 0; i < n; ++i) {
      const double w = width(rng);
      segs.push_back({edge, edge + w, height(rng)});
      edge += w;
    }
    return dwell::PotentialSpec(std::move(segs));
  }

  // positive energy kept clear of every segment height, so the sine-form
  // parametrization stays well defined in every segment
  double random_energy(const dwell::PotentialSpec& spec) {
    std::uniform_real_distribution<double> en(0.1, 10.0);
    for (;;) {
      const double e = en(rng);
      bool clear = true;
      for (const auto& s : spec.segments())
        if (std::fabs(e - s.height) < 1e-4) clear = false;
      if (clear) return e;
    }
  }

  // dyadic parameters (multiples of 1/1024): float sums stay exact, so the
  // build/rebuild round trip can be asserted bit for bit
  dwell::DoubleWellParams dyadic_params() {
    auto dy = [&](double lo, double hi) {
      std::uniform_int_distribution<int> g(static_cast<int>(lo * 1024),
                                           static_cast<int>(hi * 1024));
      return g(rng) / 1024.0;
    };
    dwell::DoubleWellParams p;
    p.v1 = dy(-2.0, 2.0);
    p.v2 = dy(2.0, 6.0);
    p.v3 = dy(0.0, 2.0);
    p.v4 = dy(2.0, 6.0);
    p.x1 = dy(0.25, 2.0);
    p.barrier_thickness = dy(0.125, 3.0);
    p.outer_well_width = dy(0.25, 2.0);
    p.outer_barrier_width = dy(0.125, 1.0);
    return p;
  }
};

// The matching recursion for the phase, applied edge by edge with the
// principal complex arctangent:
//   delta_{i+1} = -K_{i+1} x_{i+1} + atan(K_{i+1}/K_i tan(K_i x_{i+1} + delta_i))
// Valid mod pi on the real axis; the branch-free propagation must agree
// with it there.
inline dwell::Complex atan_recursion_phase(const dwell::PotentialSpec& spec, double e) {
  using dwell::Complex;
  const auto& segs = spec.segments();
  Complex delta = 0.0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const double edge = segs[i].right_edge;
    const Complex ki = dwell::momentum(Complex(e, 0.0), segs[i].height);
    const Complex kn = i + 1 < segs.size()
                           ? dwell::momentum(Complex(e, 0.0), segs[i + 1].height)
                           : dwell::momentum(Complex(e, 0.0), 0.0);
    delta = -kn * edge + std::atan(kn / ki * std::tan(ki * edge + delta));
  }
  return delta;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace testsup
