#include "dwell/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dwell {

namespace {

constexpr double kJumpThreshold = 0.1;  // max step-to-step pole displacement
constexpr double kCollisionTol = 1e-9;

PotentialSpec spec_at(const DoubleWellParams& base, SweepParameter which, double p) {
  return build_double_well(with_parameter(base, which, p));
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  return det != 0.0 ? (n * sxy - sx * sy) / det : 0.0;
}

}  // namespace

DoubleWellParams with_parameter(DoubleWellParams base, SweepParameter which,
                                double value) {
  switch (which) {
    case SweepParameter::barrier_thickness: base.barrier_thickness = value; break;
    case SweepParameter::outer_well_depth: base.v3 = value; break;
    case SweepParameter::barrier_height: base.v2 = value; break;
    case SweepParameter::inner_well_depth: base.v1 = value; break;
  }
  return base;
}

double get_parameter(const DoubleWellParams& params, SweepParameter which) {
  switch (which) {
    case SweepParameter::barrier_thickness: return params.barrier_thickness;
    case SweepParameter::outer_well_depth: return params.v3;
    case SweepParameter::barrier_height: return params.v2;
    case SweepParameter::inner_well_depth: return params.v1;
  }
  return 0.0;
}

void SweepSpec::validate() const {
  if (!std::isfinite(start) || !std::isfinite(stop))
    throw std::invalid_argument("SweepSpec: non-finite endpoints");
  if (!(min_step > 0.0))
    throw std::invalid_argument("SweepSpec: min_step must be > 0");
  if (!(initial_step >= min_step))
    throw std::invalid_argument("SweepSpec: initial_step must be >= min_step");
}

std::vector<Trajectory> track(const DoubleWellParams& params, const SweepSpec& sweep,
                              std::span<const Pole> seeds) {
  sweep.validate();
  if (seeds.empty()) throw std::invalid_argument("track: no seed poles");

  const std::size_t m = seeds.size();
  std::vector<Trajectory> trajs(m);
  {
    const PotentialSpec spec0 = spec_at(params, sweep.parameter, sweep.start);
    for (std::size_t i = 0; i < m; ++i) {
      const RefineResult r = refine(spec0, seeds[i].energy);
      if (!r.converged || std::abs(r.pole.energy - seeds[i].energy) > 1e-6)
        throw std::invalid_argument("track: seed " + std::to_string(i) +
                                    " is not a converged pole at the sweep start");
      trajs[i].label = static_cast<int>(i);
      trajs[i].points.push_back({sweep.start, r.pole});
    }
  }
  if (sweep.start == sweep.stop) return trajs;

  const double dir = sweep.stop > sweep.start ? 1.0 : -1.0;
  double step = sweep.initial_step;
  double p_cur = sweep.start;

  auto predict = [](const Trajectory& t, double p_next) {
    const auto& pts = t.points;
    const Complex last = pts.back().pole.energy;
    if (pts.size() < 2) return last;
    const auto& prev = pts[pts.size() - 2];
    const double dp = pts.back().parameter - prev.parameter;
    return last + (last - prev.pole.energy) * ((p_next - pts.back().parameter) / dp);
  };

  auto diagnostic_failure = [&](double p_fail, const std::string& why) {
    // report the argument-principle count around the last accepted poles so a
    // lost trajectory is distinguishable from a genuinely vanished pole
    double re_lo = 1e300, re_hi = -1e300, im_lo = 1e300;
    for (const auto& t : trajs) {
      const Complex e = t.points.back().pole.energy;
      re_lo = std::min(re_lo, e.real());
      re_hi = std::max(re_hi, e.real());
      im_lo = std::min(im_lo, e.imag());
    }
    const Rectangle box{std::max(1e-6, re_lo - 0.5), re_hi + 0.5, im_lo - 0.5, -1e-9};
    std::string diag;
    try {
      const int w = winding_count(spec_at(params, sweep.parameter, p_fail), box);
      diag = "winding count " + std::to_string(w) + " over Re [" +
             std::to_string(box.re_min) + "," + std::to_string(box.re_max) +
             "], Im [" + std::to_string(box.im_min) + ",0) vs " +
             std::to_string(trajs.size()) + " tracked trajectories";
    } catch (const std::exception& e) {
      diag = std::string("winding diagnostic unavailable: ") + e.what();
    }
    throw std::runtime_error("track: " + why + " at parameter " +
                             std::to_string(p_fail) + "; " + diag);
  };

  while (p_cur != sweep.stop) {
    double p_next = p_cur + dir * step;
    if ((p_next - sweep.stop) * dir >= 0.0) p_next = sweep.stop;

    const PotentialSpec spec = spec_at(params, sweep.parameter, p_next);
    std::vector<Complex> preds(m);
    std::vector<Pole> corrected(m);
    bool ok = true;
    for (std::size_t i = 0; i < m && ok; ++i) {
      preds[i] = predict(trajs[i], p_next);
      const RefineResult r = refine(spec, preds[i]);
      ok = r.converged && r.pole.energy.imag() < 0.0 &&
           std::abs(r.pole.energy - preds[i]) <= kJumpThreshold &&
           std::abs(r.pole.energy - trajs[i].points.back().pole.energy) <= kJumpThreshold;
      corrected[i] = r.pole;
    }

    // collision: two trajectories corrected onto the same root
    std::optional<std::pair<std::size_t, std::size_t>> clash;
    if (ok)
      for (std::size_t i = 0; i < m && !clash; ++i)
        for (std::size_t j = i + 1; j < m && !clash; ++j)
          if (std::abs(corrected[i].energy - corrected[j].energy) < kCollisionTol)
            clash = {i, j};

    if (ok && clash && step / 2.0 < sweep.min_step) {
      // persistent collision at the smallest step: pull the pair apart by
      // deflating the shared root and keep going, flagged as near-degenerate
      const auto [i, j] = *clash;
      const Complex shared[] = {corrected[i].energy};
      const RefineResult other = refine(spec, preds[j], shared);
      if (other.converged &&
          std::abs(other.pole.energy - corrected[i].energy) > kCollisionTol &&
          std::abs(other.pole.energy - preds[j]) <= kJumpThreshold) {
        const double keep_cost = std::abs(corrected[i].energy - preds[i]) +
                                 std::abs(other.pole.energy - preds[j]);
        const double swap_cost = std::abs(corrected[i].energy - preds[j]) +
                                 std::abs(other.pole.energy - preds[i]);
        (swap_cost < keep_cost ? corrected[i] : corrected[j]) = other.pole;
        trajs[i].near_degenerate_at = p_next;
        trajs[j].near_degenerate_at = p_next;
        clash.reset();
      } else {
        diagnostic_failure(p_next, "could not separate colliding poles");
      }
    }

    if (ok && !clash) {
      for (std::size_t i = 0; i < m; ++i)
        trajs[i].points.push_back({p_next, corrected[i]});
      p_cur = p_next;
      step = std::min(sweep.initial_step, step * 1.6);
    } else {
      step /= 2.0;
      if (step < sweep.min_step)
        diagnostic_failure(p_next, "pole correction failed below min_step");
    }
  }
  return trajs;
}

std::optional<TransitionReport> classify_regimes(std::span<const Trajectory> trajectories) {
  if (trajectories.size() != 2)
    throw std::invalid_argument("classify_regimes: exactly two trajectories required");
  const auto& a = trajectories[0].points;
  const auto& b = trajectories[1].points;
  const std::size_t n = a.size();
  if (n != b.size() || n < 6)
    throw std::invalid_argument("classify_regimes: trajectories must share one grid");
  for (std::size_t i = 0; i < n; ++i)
    if (a[i].parameter != b[i].parameter)
      throw std::invalid_argument("classify_regimes: trajectories must share one grid");

  std::vector<double> params(n), gap(n), d_er(n), d_gamma(n);
  for (std::size_t i = 0; i < n; ++i) {
    params[i] = a[i].parameter;
    gap[i] = std::abs(a[i].pole.energy - b[i].pole.energy);
    d_er[i] = std::fabs(a[i].pole.e_r() - b[i].pole.e_r());
    d_gamma[i] = std::fabs(a[i].pole.gamma() - b[i].pole.gamma());
  }
  const std::size_t imin = static_cast<std::size_t>(
      std::min_element(gap.begin(), gap.end()) - gap.begin());
  if (imin == 0 || imin == n - 1) return std::nullopt;  // gap monotone: no transition

  const double sweep_sign = params[1] > params[0] ? 1.0 : -1.0;
  auto classify_side = [&](std::size_t lo, std::size_t hi) {
    // 5-point window (clamped) of the relative trends along the sweep
    std::vector<double> px(params.begin() + lo, params.begin() + hi + 1);
    std::vector<double> er(d_er.begin() + lo, d_er.begin() + hi + 1);
    std::vector<double> ga(d_gamma.begin() + lo, d_gamma.begin() + hi + 1);
    double er_mean = 0, ga_mean = 0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      er_mean += er[i];
      ga_mean += ga[i];
    }
    er_mean = std::max(er_mean / px.size(), 1e-12);
    ga_mean = std::max(ga_mean / px.size(), 1e-12);
    const double trend_er = sweep_sign * least_squares_slope(px, er) / er_mean;
    const double trend_gamma = sweep_sign * least_squares_slope(px, ga) / ga_mean;
    // widths converging faster than positions split = resonant tunneling
    return -trend_gamma > trend_er ? Regime::resonant_tunneling
                                   : Regime::level_repulsion;
  };

  // 5-point windows centered on the middle of each side: far enough from
  // the exchange region to read the asymptotic trend, independent of the
  // sweep resolution
  auto window = [&](std::size_t lo_edge, std::size_t hi_edge) {
    const std::size_t mid = (lo_edge + hi_edge) / 2;
    std::size_t lo = mid >= lo_edge + 2 ? mid - 2 : lo_edge;
    std::size_t hi = std::min(hi_edge, lo + 4);
    lo = hi >= 4 ? std::max(lo_edge, hi - 4) : lo_edge;
    return std::pair{lo, hi};
  };
  const auto [blo, bhi] = window(0, imin - 1);
  const auto [alo, ahi] = window(imin + 1, n - 1);
  if (bhi <= blo || ahi <= alo) return std::nullopt;

  TransitionReport rep;
  rep.transition_parameter = params[imin];
  rep.min_pole_gap = gap[imin];
  rep.regime_before = classify_side(blo, bhi);
  rep.regime_after = classify_side(alo, ahi);
  if (rep.regime_before == rep.regime_after) return std::nullopt;
  return rep;
}

namespace {

// residual of the double-pole system: (Re W, Im W, Re W', Im W')
struct SystemEval {
  Complex w, dw;
};

SystemEval eval_system(const DoubleWellParams& base, double d, double v, Complex e) {
  const DoubleWellParams p =
      with_parameter(with_parameter(base, SweepParameter::barrier_thickness, d),
                     SweepParameter::outer_well_depth, v);
  const PoleFunctionJet jet = pole_function_jet(build_double_well(p), e);
  return {jet.w, jet.dw};
}

bool solve4(double a[4][4], double rhs[4], double x[4]) {
  int perm[4] = {0, 1, 2, 3};
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::fabs(a[perm[r]][col]) > std::fabs(a[perm[piv]][col])) piv = r;
    std::swap(perm[col], perm[piv]);
    const double p = a[perm[col]][col];
    if (std::fabs(p) < 1e-300) return false;
    for (int r = col + 1; r < 4; ++r) {
      const double f = a[perm[r]][col] / p;
      for (int c = col; c < 4; ++c) a[perm[r]][c] -= f * a[perm[col]][c];
      rhs[perm[r]] -= f * rhs[perm[col]];
    }
  }
  for (int col = 3; col >= 0; --col) {
    double s = rhs[perm[col]];
    for (int c = col + 1; c < 4; ++c) s -= a[perm[col]][c] * x[c];
    x[col] = s / a[perm[col]][col];
  }
  return true;
}

}  // namespace

DoublePoleResult find_double_pole(const DoubleWellParams& base, const DoublePoleBox& box,
                                  const SearchRegion& seed_region) {
  if (!(box.d_min < box.d_max) || !(box.v_min < box.v_max) || box.d_min < 0.0)
    throw std::invalid_argument("find_double_pole: malformed search box");

  DoublePoleResult out;
  out.min_gap = std::numeric_limits<double>::infinity();

  // coarse scan: for a handful of V values, follow the closest pole pair
  // down in D and remember the tightest approach
  const int nv = 7;
  for (int iv = 0; iv < nv; ++iv) {
    const double v = box.v_min + (box.v_max - box.v_min) * iv / (nv - 1);
    const DoubleWellParams pv = with_parameter(base, SweepParameter::outer_well_depth, v);
    std::vector<Pole> pair;
    try {
      const PoleSearch ps = find_poles(
          build_double_well(with_parameter(pv, SweepParameter::barrier_thickness, box.d_max)),
          seed_region);
      if (ps.poles.size() < 2) continue;
      // closest pair of the found poles
      std::size_t bi = 0, bj = 1;
      for (std::size_t i = 0; i < ps.poles.size(); ++i)
        for (std::size_t j = i + 1; j < ps.poles.size(); ++j)
          if (std::abs(ps.poles[i].energy - ps.poles[j].energy) <
              std::abs(ps.poles[bi].energy - ps.poles[bj].energy)) {
            bi = i;
            bj = j;
          }
      pair = {ps.poles[bi], ps.poles[bj]};
    } catch (const std::exception&) {
      continue;
    }

    SweepSpec sweep;
    sweep.parameter = SweepParameter::barrier_thickness;
    sweep.start = box.d_max;
    sweep.stop = box.d_min;
    sweep.initial_step = (box.d_max - box.d_min) / 50.0;
    sweep.min_step = sweep.initial_step * 1e-3;
    std::vector<Trajectory> trajs;
    try {
      trajs = track(pv, sweep, pair);
    } catch (const std::exception&) {
      continue;
    }
    for (std::size_t i = 0; i < trajs[0].points.size(); ++i) {
      const Complex ea = trajs[0].points[i].pole.energy;
      const Complex eb = trajs[1].points[i].pole.energy;
      const double g = std::abs(ea - eb);
      if (g < out.min_gap) {
        out.min_gap = g;
        out.d = trajs[0].points[i].parameter;
        out.v = v;
        out.energy = 0.5 * (ea + eb);
      }
    }
  }
  if (!std::isfinite(out.min_gap)) return out;  // nothing to refine against

  // Newton on the joint system in (Re E, Im E, D, V)
  double x[4] = {out.energy.real(), out.energy.imag(), out.d, out.v};
  bool converged = false;
  try {
  for (int it = 0; it < 60; ++it) {
    ++out.iterations;
    if (x[2] < 0.0) break;  // stepped out of the physical D range
    const Complex e(x[0], x[1]);
    const SystemEval f0 = eval_system(base, x[2], x[3], e);
    double rhs[4] = {-f0.w.real(), -f0.w.imag(), -f0.dw.real(), -f0.dw.imag()};

    const double h_e = 1e-6 * (1.0 + std::abs(e));
    const double h_d = 1e-6 * (1.0 + std::fabs(x[2]));
    const double h_v = 1e-6 * (1.0 + std::fabs(x[3]));
    // d/dE columns: W' is exact; W'' by central difference
    const Complex w2 = (eval_system(base, x[2], x[3], e + h_e).dw -
                        eval_system(base, x[2], x[3], e - h_e).dw) /
                       (2.0 * h_e);
    const SystemEval fdp = eval_system(base, x[2] + h_d, x[3], e);
    const SystemEval fdm = eval_system(base, x[2] - h_d, x[3], e);
    const SystemEval fvp = eval_system(base, x[2], x[3] + h_v, e);
    const SystemEval fvm = eval_system(base, x[2], x[3] - h_v, e);
    const Complex w_d = (fdp.w - fdm.w) / (2.0 * h_d);
    const Complex dw_d = (fdp.dw - fdm.dw) / (2.0 * h_d);
    const Complex w_v = (fvp.w - fvm.w) / (2.0 * h_v);
    const Complex dw_v = (fvp.dw - fvm.dw) / (2.0 * h_v);

    double jac[4][4] = {
        {f0.dw.real(), -f0.dw.imag(), w_d.real(), w_v.real()},
        {f0.dw.imag(), f0.dw.real(), w_d.imag(), w_v.imag()},
        {w2.real(), -w2.imag(), dw_d.real(), dw_v.real()},
        {w2.imag(), w2.real(), dw_d.imag(), dw_v.imag()},
    };
    double step[4];
    if (!solve4(jac, rhs, step)) break;
    double norm = 0.0;
    for (double s : step) norm = std::max(norm, std::fabs(s));
    if (norm > 0.2)
      for (double& s : step) s *= 0.2 / norm;
    for (int i = 0; i < 4; ++i) x[i] += step[i];
    if (norm < 1e-13 * (1.0 + std::fabs(x[0]))) {
      converged = true;
      break;
    }
  }
  } catch (const std::invalid_argument&) {
    converged = false;  // wandered into an invalid geometry: no double pole here
  }

  out.energy = Complex(x[0], x[1]);
  out.d = x[2];
  out.v = x[3];
  if (out.d < 0.0) return out;  // not converged
  const SystemEval fin = eval_system(base, out.d, out.v, out.energy);
  out.residual = std::abs(fin.w) + std::abs(fin.dw);
  if (!converged) return out;

  // the box is the contract: a coalescence Newton wandered to from a
  // non-bracketing box is reported as a failed search, with its data
  const double d_slack = 0.25 * (box.d_max - box.d_min);
  const double v_slack = 0.25 * (box.v_max - box.v_min);
  if (out.d < box.d_min - d_slack || out.d > box.d_max + d_slack ||
      out.v < box.v_min - v_slack || out.v > box.v_max + v_slack)
    return out;

  // certify: residual against the local scale of W, then the argument
  // principle on a tight circle must count exactly two zeros
  const PotentialSpec spec_star = build_double_well(
      with_parameter(with_parameter(base, SweepParameter::barrier_thickness, out.d),
                     SweepParameter::outer_well_depth, out.v));
  double w_scale = 0.0;
  for (Complex dir : {Complex(1, 0), Complex(-1, 0), Complex(0, 1), Complex(0, -1)})
    w_scale = std::max(w_scale,
                       std::abs(pole_function(spec_star, out.energy + 1e-2 * dir)));
  if (std::abs(fin.w) > 1e-8 * w_scale) return out;
  try {
    out.winding = winding_count_circle(spec_star, out.energy, 1e-6);
  } catch (const ContourError&) {
    out.winding = -1;  // a zero sits on the verification circle: not certified
    return out;
  }
  out.converged = true;
  return out;
}

double unfolding_exponent(const DoubleWellParams& base, const DoublePoleResult& dp,
                          std::span<const double> dv_magnitudes) {
  std::vector<double> log_dv, log_sep;
  for (double dv : dv_magnitudes) {
    for (double sign : {1.0, -1.0}) {
      const DoubleWellParams p = with_parameter(
          with_parameter(base, SweepParameter::barrier_thickness, dp.d),
          SweepParameter::outer_well_depth, dp.v + sign * dv);
      const PotentialSpec spec = build_double_well(p);
      const RefineResult r1 = refine(spec, dp.energy);
      if (!r1.converged || std::abs(r1.pole.energy - dp.energy) > 0.1) continue;
      const Complex known[] = {r1.pole.energy};
      const RefineResult r2 = refine(spec, dp.energy, known);
      if (!r2.converged || std::abs(r2.pole.energy - dp.energy) > 0.1) continue;
      const double sep = std::abs(r1.pole.energy - r2.pole.energy);
      if (!(sep > 1e-12)) continue;
      log_dv.push_back(std::log(dv));
      log_sep.push_back(std::log(sep));
    }
  }
  if (log_dv.size() < 4) return std::numeric_limits<double>::quiet_NaN();
  return least_squares_slope(log_dv, log_sep);
}

}  // namespace dwell
