#include "dwell/scattering.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace dwell {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Exact transfer step across one constant-potential piece of width d,
// together with the energy derivatives. With u = K^2 = 2(E-V):
//   c  = cos(Kd)            s  = sin(Kd)/K          us = K sin(Kd) = u s
//   dc/dE = -d s            d(us)/dE = s + d c      ds/dE = (d c - s)/u
// c, s, us, ds are entire in u; ds needs its Taylor series near u = 0.
struct Step {
  Complex c, s, us, ds;
};

Step make_step(Complex u, double d) {
  Step st;
  const Complex z2 = u * d * d;  // (Kd)^2
  if (std::abs(z2) < 1e-8) {
    // series for sin/cos at the K -> 0 degeneracy (E = V)
    st.c = 1.0 - z2 / 2.0 + z2 * z2 / 24.0;
    st.s = d * (1.0 - z2 / 6.0 + z2 * z2 / 120.0);
  } else {
    const Complex k = std::sqrt(u);
    const Complex z = k * d;
    st.c = std::cos(z);
    st.s = std::sin(z) / k;
  }
  st.us = u * st.s;
  if (std::abs(z2) < 3e-3) {
    // (d c - s)/u cancels near u = 0; 4-term series keeps ~1e-15 accuracy
    const double d3 = d * d * d;
    st.ds = d3 * (-1.0 / 3.0 + z2 * (1.0 / 30.0 + z2 * (-1.0 / 840.0 + z2 / 45360.0)));
  } else {
    st.ds = (d * st.c - st.s) / u;
  }
  return st;
}

struct StateJet {
  Complex psi, dpsi;      // regular solution and derivative
  Complex psi_e, dpsi_e;  // d/dE of the above
};

StateJet propagate_jet(const PotentialSpec& spec, Complex e) {
  StateJet w{0.0, 1.0, 0.0, 0.0};
  for (const Segment& seg : spec.segments()) {
    const Step st = make_step(2.0 * (e - seg.height), seg.width());
    const Complex dc = -seg.width() * st.s;          // dc/dE
    const Complex dus = st.s + seg.width() * st.c;   // d(us)/dE
    const Complex psi = st.c * w.psi + st.s * w.dpsi;
    const Complex dpsi = -st.us * w.psi + st.c * w.dpsi;
    const Complex psi_e = dc * w.psi + st.ds * w.dpsi + st.c * w.psi_e + st.s * w.dpsi_e;
    const Complex dpsi_e = -dus * w.psi - st.us * w.psi_e + dc * w.dpsi + st.c * w.dpsi_e;
    w = {psi, dpsi, psi_e, dpsi_e};
  }
  return w;
}

// boundary states at x = 0 and at every segment right edge
std::vector<BoundaryState> edge_states(const PotentialSpec& spec, Complex e) {
  std::vector<BoundaryState> states;
  states.reserve(spec.size() + 1);
  BoundaryState b{0.0, 1.0};
  states.push_back(b);
  for (const Segment& seg : spec.segments()) {
    const Step st = make_step(2.0 * (e - seg.height), seg.width());
    b = {st.c * b.psi + st.s * b.dpsi, -st.us * b.psi + st.c * b.dpsi};
    states.push_back(b);
  }
  return states;
}

double reduce_mod_pi(double delta) {
  double r = std::remainder(delta, kPi);  // [-pi/2, pi/2]
  if (r <= -kPi / 2.0) r += kPi;
  return r;
}

// psi(x) = a sin(kx + delta) coefficients from the state at position x0.
SegmentWave sine_form(Complex k, double x0, const BoundaryState& b) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SegmentWave w{k, {nan, nan}, {nan, nan}};
  if (std::abs(k) < 1e-12) return w;  // linear solution, sine form degenerate
  // theta = kx0 + delta from tan(theta) = k psi / dpsi, using the cotangent
  // form when dpsi is the small one
  const Complex kp = k * b.psi;
  Complex theta;
  if (std::abs(kp) <= std::abs(b.dpsi)) {
    theta = std::atan(kp / b.dpsi);
  } else {
    const double sign = (kp / b.dpsi).real() < 0.0 ? -1.0 : 1.0;
    theta = sign * kPi / 2.0 - std::atan(b.dpsi / kp);
  }
  w.delta = theta - k * x0;
  const Complex sn = std::sin(theta), cn = std::cos(theta);
  w.a = std::abs(sn) >= std::abs(cn) ? b.psi / sn : b.dpsi / (k * cn);
  return w;
}

}  // namespace

Complex momentum(Complex e, double v) {
  return std::sqrt(2.0 * (e - v));
}

BoundaryState propagate(const PotentialSpec& spec, Complex e) {
  BoundaryState b{0.0, 1.0};
  for (const Segment& seg : spec.segments()) {
    const Step st = make_step(2.0 * (e - seg.height), seg.width());
    b = {st.c * b.psi + st.s * b.dpsi, -st.us * b.psi + st.c * b.dpsi};
  }
  return b;
}

WaveSolution solve_wave(const PotentialSpec& spec, Complex e) {
  WaveSolution sol;
  sol.energy = e;
  sol.edge_states = edge_states(spec, e);
  sol.segments.reserve(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Segment& seg = spec.segments()[i];
    sol.segments.push_back(
        sine_form(momentum(e, seg.height), seg.left_edge, sol.edge_states[i]));
  }
  sol.exterior = sine_form(momentum(e, 0.0), spec.last_edge(), sol.edge_states.back());
  sol.phase_shift = sol.exterior.delta;
  return sol;
}

double phase_shift(const PotentialSpec& spec, double e) {
  if (!(e > 0.0)) throw std::invalid_argument("phase_shift: E must be > 0");
  const BoundaryState b = propagate(spec, Complex(e, 0.0));
  const double k = std::sqrt(2.0 * e);
  const double theta = std::atan2(k * b.psi.real(), b.dpsi.real());
  return reduce_mod_pi(theta - k * spec.last_edge());
}

std::vector<double> phase_shift_grid(const PotentialSpec& spec,
                                     std::span<const double> es) {
  std::vector<double> out;
  out.reserve(es.size());
  for (double e : es) {
    double d = phase_shift(spec, e);
    if (!out.empty())
      d += kPi * std::round((out.back() - d) / kPi);
    out.push_back(d);
  }
  return out;
}

Complex s_matrix(const PotentialSpec& spec, Complex e) {
  const Complex k = momentum(e, 0.0);
  const BoundaryState b = propagate(spec, e);
  const Complex i(0.0, 1.0);
  return std::exp(-2.0 * i * k * spec.last_edge()) * (b.dpsi + i * k * b.psi) /
         (b.dpsi - i * k * b.psi);
}

Complex pole_function(const PotentialSpec& spec, Complex e) {
  const BoundaryState b = propagate(spec, e);
  return b.dpsi - Complex(0.0, 1.0) * momentum(e, 0.0) * b.psi;
}

PoleFunctionJet pole_function_jet(const PotentialSpec& spec, Complex e) {
  const StateJet w = propagate_jet(spec, e);
  const Complex i(0.0, 1.0);
  const Complex k = momentum(e, 0.0);
  const Complex dk = 1.0 / k;  // d/dE sqrt(2E)
  return {w.dpsi - i * k * w.psi, w.dpsi_e - i * (dk * w.psi + k * w.psi_e)};
}

double pole_criterion(const PotentialSpec& spec, Complex e) {
  const Complex k = momentum(e, 0.0);
  const BoundaryState b = propagate(spec, e);
  const Complex i(0.0, 1.0);
  const Complex w = b.dpsi - i * k * b.psi;
  const Complex n = std::exp(-2.0 * i * k * spec.last_edge()) * (b.dpsi + i * k * b.psi);
  return std::abs(2.0 * w / (n + w));
}

std::vector<Complex> wavefunction(const PotentialSpec& spec, Complex e,
                                  std::span<const double> xs) {
  const auto states = edge_states(spec, e);
  std::vector<Complex> out;
  out.reserve(xs.size());
  for (double x : xs) {
    const auto idx = spec.segment_index(x);  // throws for x < 0
    double left, v;
    BoundaryState b;
    if (idx) {
      left = spec.segments()[*idx].left_edge;
      v = spec.segments()[*idx].height;
      b = states[*idx];
    } else {
      left = spec.last_edge();
      v = 0.0;
      b = states.back();
    }
    const Step st = make_step(2.0 * (e - v), x - left);
    out.push_back(st.c * b.psi + st.s * b.dpsi);
  }
  return out;
}

namespace {

// sin(2Kw)/(2K), cos(2Kw) and the sin^2 antiderivative pieces as real entire
// functions of u = K^2; series where the direct forms cancel.
double sin2_over_2k(double u, double w) {
  const double t = u * w * w;
  if (std::fabs(t) < 1e-8)
    return w * (1.0 - 2.0 * t / 3.0 + 2.0 * t * t / 15.0);
  if (u > 0.0) {
    const double k = std::sqrt(u);
    return std::sin(2.0 * k * w) / (2.0 * k);
  }
  const double k = std::sqrt(-u);
  return std::sinh(2.0 * k * w) / (2.0 * k);
}

double cos_2kw(double u, double w) {
  return u >= 0.0 ? std::cos(2.0 * std::sqrt(u) * w)
                  : std::cosh(2.0 * std::sqrt(-u) * w);
}

// integral_0^w of cos(Kt)^2, (sin(Kt)/K)^2 and cos(Kt) sin(Kt)/K
void sin_cos_integrals(double u, double w, double& i_cc, double& i_ss,
                       double& i_cs) {
  const double g = sin2_over_2k(u, w);
  i_cc = 0.5 * (w + g);
  const double t = u * w * w;
  if (std::fabs(t) < 3e-3) {
    const double w3 = w * w * w;
    i_ss = w3 * (1.0 / 3.0 + t * (-1.0 / 15.0 + t * (2.0 / 315.0 - t / 2835.0)));
    i_cs = w * w * (0.5 + t * (-1.0 / 6.0 + t * (1.0 / 45.0 - t / 630.0)));
  } else {
    i_ss = 0.5 * (w - g) / u;
    i_cs = (1.0 - cos_2kw(u, w)) / (4.0 * u);
  }
}

struct NormalizedWave {
  std::vector<BoundaryState> states;
  double c2;  // squared exterior amplitude of the propagated solution
};

NormalizedWave normalized_wave(const PotentialSpec& spec, double e) {
  NormalizedWave nw;
  nw.states = edge_states(spec, Complex(e, 0.0));
  const double k = std::sqrt(2.0 * e);
  const double p = nw.states.back().psi.real();
  const double q = nw.states.back().dpsi.real();
  nw.c2 = p * p + q * q / (k * k);
  return nw;
}

}  // namespace

double occupation(const PotentialSpec& spec, double e, double a, double b) {
  if (!(e > 0.0)) throw std::invalid_argument("occupation: E must be > 0");
  if (!(a >= 0.0) || !(b >= a) || b > spec.last_edge())
    throw std::invalid_argument("occupation: need 0 <= a <= b <= last edge");
  if (a == b) return 0.0;

  const NormalizedWave nw = normalized_wave(spec, e);
  double total = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Segment& seg = spec.segments()[i];
    const double lo = std::max(a, seg.left_edge);
    const double hi = std::min(b, seg.right_edge);
    if (!(hi > lo)) continue;
    const double u = 2.0 * (e - seg.height);
    // state at the piece start
    const Step to_lo = make_step(Complex(u, 0.0), lo - seg.left_edge);
    const double p = (to_lo.c * nw.states[i].psi + to_lo.s * nw.states[i].dpsi).real();
    const double q = (-to_lo.us * nw.states[i].psi + to_lo.c * nw.states[i].dpsi).real();
    double i_cc, i_ss, i_cs;
    sin_cos_integrals(u, hi - lo, i_cc, i_ss, i_cs);
    total += p * p * i_cc + 2.0 * p * q * i_cs + q * q * i_ss;
  }
  return total / nw.c2;
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double m,
                   double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_rec(f, m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 28);
}

}  // namespace

double occupation_quadrature(const PotentialSpec& spec, double e, double a,
                             double b, double tol) {
  if (!(e > 0.0)) throw std::invalid_argument("occupation: E must be > 0");
  if (!(a >= 0.0) || !(b >= a) || b > spec.last_edge())
    throw std::invalid_argument("occupation: need 0 <= a <= b <= last edge");
  if (a == b) return 0.0;

  const NormalizedWave nw = normalized_wave(spec, e);
  auto density = [&](double x) {
    const auto idx = spec.segment_index(x);
    const std::size_t i = idx ? *idx : spec.size();
    const Segment* seg = idx ? &spec.segments()[*idx] : nullptr;
    const double left = seg ? seg->left_edge : spec.last_edge();
    const double v = seg ? seg->height : 0.0;
    const Step st = make_step(Complex(2.0 * (e - v), 0.0), x - left);
    const double psi = (st.c * nw.states[i].psi + st.s * nw.states[i].dpsi).real();
    return psi * psi / nw.c2;
  };
  // integrate segment pieces separately: |psi|^2 is only C^1 across edges
  double total = 0.0;
  std::vector<double> cuts{a};
  for (const Segment& seg : spec.segments())
    if (seg.right_edge > a && seg.right_edge < b) cuts.push_back(seg.right_edge);
  cuts.push_back(b);
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j)
    total += adaptive_simpson(density, cuts[j], cuts[j + 1],
                              tol * (cuts[j + 1] - cuts[j]) / (b - a));
  return total;
}

}  // namespace dwell
