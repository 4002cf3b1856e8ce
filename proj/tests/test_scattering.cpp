#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dwell/pole_finder.hpp"
#include "dwell/scattering.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace dwell;
using testsup::kPi;
using testsup::mod_pi_distance;

namespace {
const PotentialSpec kPaperSpec = build_double_well(DoubleWellParams{});
// the published doublet, rounded as displayed
const Complex kNarrowPole{2.49, -0.00394};
const Complex kBroadPole{2.43, -0.309};
}  // namespace

TEST_CASE("momentum branch: real, evanescent and resonance cases") {
  CHECK(momentum({2.0, 0.0}, 0.0) == Complex(2.0, 0.0));
  CHECK(momentum({2.0, 0.0}, 4.0) == Complex(0.0, 2.0));
  // fourth-quadrant energy: outgoing branch has Re K > 0, Im K < 0
  const Complex k = momentum({2.49, -0.00394}, 0.0);
  CHECK(k.real() > 0.0);
  CHECK(k.imag() < 0.0);
}

TEST_CASE("propagation through free space and a single flat segment") {
  // no segments at all: the initial data comes back untouched
  const BoundaryState none = propagate(PotentialSpec{}, {2.0, 0.0});
  CHECK(none.psi == Complex(0.0, 0.0));
  CHECK(none.dpsi == Complex(1.0, 0.0));

  // one zero-height segment of width a: psi = sin(ka)/k, psi' = cos(ka)
  const double a = 1.7, e = 2.0, k = std::sqrt(2.0 * e);
  const PotentialSpec flat({{0.0, a, 0.0}});
  const BoundaryState b = propagate(flat, {e, 0.0});
  CHECK(b.psi.real() == doctest::Approx(std::sin(k * a) / k).epsilon(1e-14));
  CHECK(b.dpsi.real() == doctest::Approx(std::cos(k * a)).epsilon(1e-14));
}

TEST_CASE("propagation matches the grid integrator on the published model") {
  for (double e : {2.5, 1.3, 3.7}) {
    const BoundaryState b = propagate(kPaperSpec, {e, 0.0});
    const auto g = oracle::numerov_boundary_state(kPaperSpec, e, 2e-3);
    CHECK(std::fabs(b.psi.real() - g.psi) < 1e-8 * std::fabs(g.psi));
    CHECK(std::fabs(b.dpsi.real() - g.dpsi) < 1e-8 * std::fabs(g.dpsi));
  }
}

TEST_CASE("propagation is exact at the K = 0 degeneracy") {
  // E equal to a segment height: psi grows linearly there
  const PotentialSpec flat({{0.0, 2.0, 1.5}});
  const BoundaryState b = propagate(flat, {1.5, 0.0});
  CHECK(b.psi.real() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(b.dpsi.real() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("phase shift of free motion and of the bare wall is zero") {
  DoubleWellParams p;
  p.v1 = p.v2 = p.v3 = p.v4 = 0.0;
  const PotentialSpec free_spec = build_double_well(p);
  for (double e : {0.3, 1.0, 2.5, 7.0})
    CHECK(mod_pi_distance(phase_shift(free_spec, e), 0.0) < 1e-12);
  CHECK(phase_shift(PotentialSpec{}, 2.0) == 0.0);
  CHECK_THROWS_AS(phase_shift(kPaperSpec, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(phase_shift(kPaperSpec, -1.0), std::invalid_argument);
}

TEST_CASE("phase shift climbs by about pi across the narrow resonance") {
  const double er = 2.4913, gamma = 0.0079;
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i)
    grid.push_back(er - 8.0 * gamma + 16.0 * gamma * i / 400.0);
  const auto delta = phase_shift_grid(kPaperSpec, grid);
  const double jump = delta.back() - delta.front();
  CHECK(jump > 0.6 * kPi);
  CHECK(jump < 1.4 * kPi);
  // the continuous branch agrees with the grid integrator mod pi
  for (std::size_t i = 0; i < grid.size(); i += 57)
    CHECK(mod_pi_distance(delta[i], oracle::numerov_phase_shift(
                                        kPaperSpec, grid[i], 2e-3)) < 1e-8);
}

TEST_CASE("S-matrix is unitary on the real axis and large at a pole") {
  CHECK(std::abs(s_matrix(build_double_well([] {
          DoubleWellParams q;
          q.v1 = q.v2 = q.v3 = q.v4 = 0.0;
          return q;
        }()), {2.0, 0.0}) - 1.0) < 1e-12);
  CHECK(std::fabs(std::abs(s_matrix(kPaperSpec, {2.49, 0.0})) - 1.0) < 1e-12);
  // at the (refined) pole the denominator collapses
  const RefineResult at_pole = refine(kPaperSpec, kNarrowPole);
  REQUIRE(at_pole.converged);
  CHECK(std::abs(s_matrix(kPaperSpec, at_pole.pole.energy)) > 1e3);
}

TEST_CASE("property: |S| = 1 for 200 random real-energy cases") {
  testsup::ModelGen gen(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const PotentialSpec spec = gen.random_spec();
    const double e = gen.random_energy(spec);
    CHECK(std::fabs(std::abs(s_matrix(spec, {e, 0.0})) - 1.0) < 1e-10);
  }
}

TEST_CASE("property: branch-free S equals the tan-delta form on the real axis") {
  testsup::ModelGen gen(99);
  for (int trial = 0; trial < 100; ++trial) {
    const PotentialSpec spec = gen.random_spec();
    const double e = gen.random_energy(spec);
    const double t = std::tan(phase_shift(spec, e));
    const Complex s_tan = (Complex(1.0, t)) / (Complex(1.0, -t));
    CHECK(std::abs(s_matrix(spec, {e, 0.0}) - s_tan) < 1e-9 * (1.0 + std::fabs(t)));
  }
}

TEST_CASE("property: propagation phase equals the arctangent recursion mod pi") {
  testsup::ModelGen gen(4321);
  int checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const PotentialSpec spec = gen.random_spec();
    const double e = gen.random_energy(spec);
    const Complex rec = testsup::atan_recursion_phase(spec, e);
    if (!std::isfinite(rec.real()) || std::fabs(rec.imag()) > 1e-8) continue;
    CHECK(mod_pi_distance(phase_shift(spec, e), rec.real()) < 1e-10);
    ++checked;
  }
  CHECK(checked > 100);  // the recursion is well defined almost everywhere
}

TEST_CASE("property: phase shift matches the Numerov oracle on 50 random cases") {
  testsup::ModelGen gen(2718);
  for (int trial = 0; trial < 50; ++trial) {
    const PotentialSpec spec = gen.random_spec(4);
    const double e = gen.random_energy(spec);
    CHECK(mod_pi_distance(phase_shift(spec, e),
                          oracle::numerov_phase_shift(spec, e, 1e-3)) < 1e-8);
  }
}

TEST_CASE("pole function: entire free value, near-zeros at the published poles") {
  DoubleWellParams p;
  p.v1 = p.v2 = p.v3 = p.v4 = 0.0;
  const PotentialSpec free_spec = build_double_well(p);
  // free W = e^{-ik x4}: no zeros anywhere below the axis
  CHECK(winding_count(free_spec, {0.5, 6.0, -2.0, -1e-9}) == 0);

  // refining from the displayed 3-digit values lands within their rounding
  for (Complex guess : {kNarrowPole, kBroadPole}) {
    const RefineResult r = refine(kPaperSpec, guess);
    REQUIRE(r.converged);
    CHECK(std::abs(r.pole.energy - guess) < 5e-3);
    CHECK(std::abs(pole_function(kPaperSpec, r.pole.energy)) < 1e-10);
  }

  // argument principle around the doublet counts both
  CHECK(winding_count(kPaperSpec, {2.0, 3.0, -0.5, -1e-6}) == 2);
}

TEST_CASE("pole function derivative is analytic (finite differences converge at order 2)") {
  testsup::ModelGen gen(31415);
  for (int trial = 0; trial < 10; ++trial) {
    const PotentialSpec spec = gen.random_spec();
    const Complex e(gen.random_energy(spec), -0.3);
    const Complex exact = pole_function_jet(spec, e).dw;
    auto fd = [&](double h) {
      return (pole_function(spec, e + h) - pole_function(spec, e - h)) / (2.0 * h);
    };
    const double err1 = std::abs(fd(1e-3) - exact);
    const double err2 = std::abs(fd(5e-4) - exact);
    const double err3 = std::abs(fd(2.5e-4) - exact);
    if (err2 > 1e-11 && err3 > 1e-11) {  // above the roundoff floor
      CHECK(err1 / err2 == doctest::Approx(4.0).epsilon(0.3));
      CHECK(err2 / err3 == doctest::Approx(4.0).epsilon(0.3));
    }
  }
}

TEST_CASE("wavefunction: wall zero, free sine, resonance localization") {
  CHECK(wavefunction(kPaperSpec, {2.5, 0.0}, std::vector<double>{0.0})[0] ==
        Complex(0.0, 0.0));

  DoubleWellParams p;
  p.v1 = p.v2 = p.v3 = p.v4 = 0.0;
  const PotentialSpec free_spec = build_double_well(p);
  for (double x : {0.3, 1.0, 2.7, 6.0}) {
    const Complex v = wavefunction(free_spec, {2.0, 0.0}, std::vector<double>{x})[0];
    CHECK(std::abs(v - std::sin(2.0 * x) / 2.0) < 1e-13);
  }
  CHECK_THROWS_AS(wavefunction(free_spec, {2.0, 0.0}, std::vector<double>{-1.0}),
                  std::invalid_argument);

  // at the narrow resonance the inner well holds far more probability than
  // one exterior half-wave
  const RefineResult narrow = refine(kPaperSpec, kNarrowPole);
  REQUIRE(narrow.converged);
  const double er = narrow.pole.energy.real();
  const double k = std::sqrt(2.0 * er);
  const double inner = oracle::quadrature_occupation(kPaperSpec, er, 0.0, 1.0, 1e-9);
  const double outer = oracle::quadrature_occupation(kPaperSpec, er, 4.3, 4.3 + kPi / k, 1e-9);
  CHECK(inner > 10.0 * outer);
}

TEST_CASE("wavefunction is continuous across every edge in the sine picture") {
  testsup::ModelGen gen(5555);
  for (int trial = 0; trial < 40; ++trial) {
    const PotentialSpec spec = gen.random_spec();
    const double e = gen.random_energy(spec);
    const WaveSolution sol = solve_wave(spec, {e, 0.0});
    REQUIRE(sol.segments.size() == spec.size());
    double scale = 0.0;
    for (const auto& st : sol.edge_states)
      scale = std::max({scale, std::abs(st.psi), std::abs(st.dpsi)});
    for (std::size_t i = 0; i + 1 <= spec.size(); ++i) {
      const double x = spec.segments()[i].right_edge;
      const SegmentWave& left = sol.segments[i];
      const SegmentWave& right =
          i + 1 < spec.size() ? sol.segments[i + 1] : sol.exterior;
      const Complex psi_l = left.a * std::sin(left.k * x + left.delta);
      const Complex psi_r = right.a * std::sin(right.k * x + right.delta);
      const Complex dpsi_l = left.a * left.k * std::cos(left.k * x + left.delta);
      const Complex dpsi_r = right.a * right.k * std::cos(right.k * x + right.delta);
      CHECK(std::abs(psi_l - psi_r) < 1e-12 * scale);
      CHECK(std::abs(dpsi_l - dpsi_r) < 1e-12 * scale * (1.0 + std::abs(left.k)));
    }
    // hard-wall boundary fixes the first phase to zero
    CHECK(mod_pi_distance(sol.segments[0].delta.real(), 0.0) < 1e-12);
    CHECK(std::fabs(sol.segments[0].delta.imag()) < 1e-12);
  }
}

TEST_CASE("occupation: trivial interval, free closed form, invalid input") {
  CHECK(occupation(kPaperSpec, 2.5, 1.0, 1.0) == 0.0);

  // single zero-height segment out to pi/k: average of sin^2 is 1/2
  const double e = 2.0, k = std::sqrt(2.0 * e);
  const PotentialSpec flat({{0.0, kPi / k, 0.0}});
  CHECK(occupation(flat, e, 0.0, kPi / k) ==
        doctest::Approx(kPi / (2.0 * k)).epsilon(1e-12));

  CHECK_THROWS_AS(occupation(kPaperSpec, 2.5, -0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(occupation(kPaperSpec, 2.5, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(occupation(kPaperSpec, 2.5, 0.0, 9.9), std::invalid_argument);
  CHECK_THROWS_AS(occupation(kPaperSpec, -2.5, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("property: closed-form occupation equals adaptive quadrature to 1e-10") {
  testsup::ModelGen gen(8080);
  for (int trial = 0; trial < 30; ++trial) {
    const PotentialSpec spec = gen.random_spec();
    const double e = gen.random_energy(spec);
    std::uniform_real_distribution<double> pos(0.0, spec.last_edge());
    double a = pos(gen.rng), b = pos(gen.rng);
    if (a > b) std::swap(a, b);
    const double closed = occupation(spec, e, a, b);
    const double quad = occupation_quadrature(spec, e, a, b, 1e-12);
    CHECK(std::fabs(closed - quad) < 1e-10 * (1.0 + std::fabs(closed)));
  }
}

TEST_CASE("occupation agrees with the independent grid quadrature") {
  for (double e : {1.8, 2.3, 2.9}) {
    const double p1 = occupation(kPaperSpec, e, 0.0, 1.0);
    const double p2 = oracle::quadrature_occupation(kPaperSpec, e, 0.0, 1.0, 1e-10);
    CHECK(p1 == doctest::Approx(p2).epsilon(1e-7));
  }
}

TEST_CASE("pole criterion: small exactly at poles, order unity elsewhere") {
  const RefineResult r = refine(kPaperSpec, kNarrowPole);
  REQUIRE(r.converged);
  const double at_pole = pole_criterion(kPaperSpec, r.pole.energy);
  const double nearby = pole_criterion(kPaperSpec, r.pole.energy + Complex(1e-3, 0.0));
  CHECK(at_pole < 1e-8 * nearby);
}
