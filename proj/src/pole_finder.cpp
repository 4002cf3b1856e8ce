#include "dwell/pole_finder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace dwell {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kDedupeTol = 1e-9;
constexpr double kPairTol = 1e-3;  // seeds this close trigger deflation

bool finite(Complex z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Accumulated change of arg W between two contour points, bisecting until
// each piece rotates by < 0.5 rad and |W| moves by < half its magnitude
// (both guards together rule out phase aliasing past a nearby zero).
double segment_phase(const PotentialSpec& spec, Complex za, Complex wa,
                     Complex zb, Complex wb, double floor, int depth) {
  if (std::abs(wa) < floor || std::abs(wb) < floor)
    throw ContourError("winding: zero of W on or numerically on the contour");
  const double d = std::arg(wb / wa);
  if (std::abs(d) <= 0.5 &&
      std::abs(wb - wa) <= 0.5 * std::max(std::abs(wa), std::abs(wb)))
    return d;
  if (depth <= 0)
    throw std::runtime_error("winding: contour refinement exhausted");
  const Complex zm = 0.5 * (za + zb);
  const Complex wm = pole_function(spec, zm);
  return segment_phase(spec, za, wa, zm, wm, floor, depth - 1) +
         segment_phase(spec, zm, wm, zb, wb, floor, depth - 1);
}

int winding_polyline(const PotentialSpec& spec, const std::vector<Complex>& pts) {
  std::vector<Complex> w(pts.size());
  double wmax = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    w[i] = pole_function(spec, pts[i]);
    wmax = std::max(wmax, std::abs(w[i]));
  }
  const double floor = 1e-10 * wmax;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += segment_phase(spec, pts[i], w[i], pts[i + 1], w[i + 1], floor, 48);
  const double turns = total / kTwoPi;
  const int n = static_cast<int>(std::lround(turns));
  if (std::fabs(turns - n) > 0.25)
    throw std::runtime_error("winding: phase total " + std::to_string(turns) +
                             " is not close to an integer");
  return n;
}

}  // namespace

void SearchRegion::validate() const {
  if (!(re_min > 0.0) || !(re_max > re_min))
    throw std::invalid_argument("SearchRegion: need 0 < re_min < re_max");
  if (!(im_min < im_max) || im_max > 0.0)
    throw std::invalid_argument("SearchRegion: need im_min < im_max <= 0");
  if (!(density > 0.0))
    throw std::invalid_argument("SearchRegion: density must be > 0");
}

int winding_count(const PotentialSpec& spec, const Rectangle& r) {
  if (!(r.re_min < r.re_max) || !(r.im_min < r.im_max))
    throw std::invalid_argument("winding_count: malformed rectangle");
  const int n = 64;  // initial samples per edge; bisection refines as needed
  std::vector<Complex> pts;
  pts.reserve(4 * n + 1);
  auto edge = [&](Complex from, Complex to) {
    for (int i = 0; i < n; ++i)
      pts.push_back(from + (to - from) * (static_cast<double>(i) / n));
  };
  const Complex a(r.re_min, r.im_min), b(r.re_max, r.im_min);
  const Complex c(r.re_max, r.im_max), d(r.re_min, r.im_max);
  edge(a, b);
  edge(b, c);
  edge(c, d);
  edge(d, a);
  pts.push_back(a);
  return winding_polyline(spec, pts);
}

int winding_count_circle(const PotentialSpec& spec, Complex center, double radius) {
  if (!(radius > 0.0))
    throw std::invalid_argument("winding_count_circle: radius must be > 0");
  const int n = 64;
  std::vector<Complex> pts;
  pts.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = kTwoPi * i / n;
    pts.push_back(center + radius * Complex(std::cos(t), std::sin(t)));
  }
  pts.back() = pts.front();
  return winding_polyline(spec, pts);
}

namespace {

// |W| rescaled by the deflated roots; the quantity Newton actually drives to 0
double deflated_abs(const PotentialSpec& spec, Complex e,
                    std::span<const Complex> deflate) {
  double v = std::abs(pole_function(spec, e));
  for (Complex r : deflate) {
    const double d = std::abs(e - r);
    v = d > 0.0 ? v / d : std::numeric_limits<double>::infinity();
  }
  return v;
}

// Largest |W| a small distance away from e; the yardstick for "W(e) is zero".
double local_w_scale(const PotentialSpec& spec, Complex e) {
  const double h = 1e-3 * (1.0 + std::abs(e));
  double s = 0.0;
  for (Complex dir : {Complex(1, 0), Complex(-1, 0), Complex(0, 1), Complex(0, -1)})
    s = std::max(s, std::abs(pole_function(spec, e + h * dir)));
  return s;
}

// Nelder-Mead descent on the deflated |W|^2 in the (Re E, Im E) plane.
Complex simplex_descent(const PotentialSpec& spec, Complex start,
                        std::span<const Complex> deflate) {
  auto f = [&](Complex z) {
    const double a = deflated_abs(spec, z, deflate);
    return a * a;
  };
  const double h = 1e-3 * (1.0 + std::abs(start));
  std::array<Complex, 3> x{start, start + Complex(h, 0), start + Complex(0, h)};
  std::array<double, 3> fx{f(x[0]), f(x[1]), f(x[2])};
  for (int it = 0; it < 200; ++it) {
    // order best..worst
    std::array<int, 3> ord{0, 1, 2};
    std::sort(ord.begin(), ord.end(), [&](int i, int j) { return fx[i] < fx[j]; });
    const Complex xb = x[ord[0]], xm = x[ord[1]], xw = x[ord[2]];
    const double fb = fx[ord[0]], fm = fx[ord[1]], fw = fx[ord[2]];
    if (std::abs(xw - xb) < 1e-14 * (1.0 + std::abs(xb))) break;
    const Complex centroid = 0.5 * (xb + xm);
    const Complex xr = centroid + (centroid - xw);
    const double fr = f(xr);
    Complex xn = xr;
    double fn = fr;
    if (fr < fb) {
      const Complex xe = centroid + 2.0 * (centroid - xw);
      const double fe = f(xe);
      if (fe < fr) {
        xn = xe;
        fn = fe;
      }
    } else if (fr >= fm) {
      const Complex xc = centroid + 0.5 * (xw - centroid);
      const double fc = f(xc);
      if (fc < fw) {
        xn = xc;
        fn = fc;
      } else {  // shrink toward the best vertex
        x = {xb, xb + 0.5 * (xm - xb), xb + 0.5 * (xw - xb)};
        fx = {fb, f(x[1]), f(x[2])};
        continue;
      }
    }
    x = {xb, xm, xn};
    fx = {fb, fm, fn};
  }
  const int best = fx[0] <= fx[1] ? (fx[0] <= fx[2] ? 0 : 2) : (fx[1] <= fx[2] ? 1 : 2);
  return x[best];
}

}  // namespace

RefineResult refine(const PotentialSpec& spec, Complex guess,
                    std::span<const Complex> deflate) {
  RefineResult res;
  Complex e = guess;
  Complex best = guess;
  double best_val = std::numeric_limits<double>::infinity();
  bool fallback_done = false;

  while (res.iterations < 100) {
    ++res.iterations;
    bool stalled = false;
    if (!finite(e) || e.real() <= 0.0) {
      stalled = true;
    } else {
      const PoleFunctionJet jet = pole_function_jet(spec, e);
      const double val = deflated_abs(spec, e, deflate);
      if (val < best_val) {
        best_val = val;
        best = e;
      }
      Complex dlog = jet.dw / jet.w;  // g'/g after deflation
      for (Complex r : deflate) dlog -= 1.0 / (e - r);
      Complex step = -1.0 / dlog;
      if (!finite(step)) {
        if (jet.w == Complex(0.0, 0.0)) step = 0.0;  // sitting on the root
        else stalled = true;
      }
      if (!stalled) {
        const double cap = 0.5 * (1.0 + std::abs(e));
        if (std::abs(step) > cap) step *= cap / std::abs(step);
        e += step;
        if (std::abs(step) < 1e-12 * (1.0 + std::abs(e))) {
          const double absw = std::abs(pole_function(spec, e));
          if (absw <= 1e-10 * local_w_scale(spec, e) && e.real() > 0.0) {
            res.converged = true;
            res.pole = {e, 1, absw};
            return res;
          }
          stalled = true;  // tiny steps but residual not small: false basin
        }
      }
    }
    if (stalled) {
      if (fallback_done) break;
      e = simplex_descent(spec, finite(e) && e.real() > 0.0 ? e : best, deflate);
      fallback_done = true;
    }
  }
  res.pole = {best, 1, std::abs(pole_function(spec, best))};
  return res;
}

PoleSearch find_poles(const PotentialSpec& spec, const SearchRegion& region) {
  region.validate();
  PoleSearch out;

  // |W| on the seed grid
  const int nx = std::max(2, static_cast<int>(
                                 std::ceil((region.re_max - region.re_min) * region.density)) + 1);
  const int ny = std::max(2, static_cast<int>(
                                 std::ceil((region.im_max - region.im_min) * region.density)) + 1);
  std::vector<double> absw(static_cast<std::size_t>(nx) * ny);
  auto grid_point = [&](int i, int j) {
    return Complex(region.re_min + (region.re_max - region.re_min) * i / (nx - 1),
                   region.im_min + (region.im_max - region.im_min) * j / (ny - 1));
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      absw[static_cast<std::size_t>(j) * nx + i] =
          std::abs(pole_function(spec, grid_point(i, j)));

  // every grid-local minimum (8-neighborhood, boundaries included) is a seed
  std::vector<Complex> seeds;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double v = absw[static_cast<std::size_t>(j) * nx + i];
      bool is_min = true;
      for (int dj = -1; dj <= 1 && is_min; ++dj)
        for (int di = -1; di <= 1 && is_min; ++di) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) continue;
          if (absw[static_cast<std::size_t>(jj) * nx + ii] < v) is_min = false;
        }
      if (is_min) seeds.push_back(grid_point(i, j));
    }
  }

  // refine every seed
  std::vector<Complex> roots;
  std::vector<double> residuals;
  auto add_root = [&](Complex r, double resid) {
    for (std::size_t i = 0; i < roots.size(); ++i)
      if (std::abs(roots[i] - r) <= kDedupeTol) return;
    roots.push_back(r);
    residuals.push_back(resid);
  };
  for (Complex s : seeds) {
    const RefineResult r = refine(spec, s);
    if (!r.converged) {
      ++out.seeds_failed;
      continue;
    }
    if (!region.contains(r.pole.energy)) continue;
    add_root(r.pole.energy, r.pole.residual);
  }

  // close-pair sweep: divide the known roots out and restart right next to
  // each of them. A near-degenerate sibling can hide inside a single grid
  // dip (one seed for two roots), but it is the nearest zero of the deflated
  // function, so these restarts land on it immediately.
  for (int round = 0; round < 3; ++round) {
    const std::size_t before = roots.size();
    for (std::size_t i = 0; i < before; ++i) {
      const Complex r = roots[i];
      const double h = 1e-5 * (1.0 + std::abs(r));
      for (Complex dir : {Complex(1, 1), Complex(-1, 1), Complex(1, -1), Complex(-1, -1)}) {
        const RefineResult rr = refine(spec, r + h * dir, roots);
        if (rr.converged && region.contains(rr.pole.energy))
          add_root(rr.pole.energy, rr.pole.residual);
      }
    }
    if (roots.size() == before) break;
  }

  // order of each root by the argument principle on a tight circle
  for (std::size_t i = 0; i < roots.size(); ++i) {
    double radius = 1e-6;
    for (std::size_t j = 0; j < roots.size(); ++j)
      if (j != i) radius = std::min(radius, 0.45 * std::abs(roots[i] - roots[j]));
    const int order = winding_count_circle(spec, roots[i], radius);
    if (order < 1)
      throw std::runtime_error("find_poles: located root has winding order 0");
    out.poles.push_back({roots[i], order, residuals[i]});
  }

  std::sort(out.poles.begin(), out.poles.end(), [](const Pole& a, const Pole& b) {
    return a.energy.real() != b.energy.real() ? a.energy.real() < b.energy.real()
                                              : a.energy.imag() < b.energy.imag();
  });

  out.winding = winding_count(
      spec, Rectangle{region.re_min, region.re_max, region.im_min, region.im_max});
  int order_sum = 0;
  for (const Pole& p : out.poles) order_sum += p.order;
  if (order_sum != out.winding)
    throw PoleCountMismatch(
        "find_poles: argument principle counts " + std::to_string(out.winding) +
        " zero(s) in the region but " + std::to_string(order_sum) +
        " were located (" + std::to_string(out.seeds_failed) + " seed(s) failed)");
  return out;
}

}  // namespace dwell
