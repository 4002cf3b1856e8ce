#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dwell/pole_finder.hpp"
#include "dwell/potential.hpp"

namespace dwell {

// Model parameter a sweep or the double-pole search can vary.
enum class SweepParameter {
  barrier_thickness,  // D, the coupling knob
  outer_well_depth,   // V = v3
  barrier_height,     // v2
  inner_well_depth,   // v1
};

DoubleWellParams with_parameter(DoubleWellParams base, SweepParameter which,
                                double value);
double get_parameter(const DoubleWellParams& params, SweepParameter which);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::barrier_thickness;
  double start = 2.0;
  double stop = 0.0;
  double initial_step = 0.01;  // magnitude; direction comes from stop - start
  double min_step = 1e-5;

  void validate() const;
};

struct TrajectoryPoint {
  double parameter;
  Pole pole;
};

// One pole followed through the sweep. Identity is continuation
// connectivity, not any sorting of the poles, which is what makes identity
// exchanges between runs observable.
struct Trajectory {
  int label = 0;  // index of the seed this trajectory continues
  std::vector<TrajectoryPoint> points;
  // set when two trajectories persistently collide at min_step and the pair
  // had to be pulled apart by deflation
  std::optional<double> near_degenerate_at;
};

enum class Regime { resonant_tunneling, level_repulsion };

struct TransitionReport {
  double transition_parameter;  // at the minimum complex-plane pole gap
  Regime regime_before;         // sweep-start side
  Regime regime_after;          // sweep-stop side
  double min_pole_gap;
};

// Predictor-corrector continuation of the seed poles through the sweep.
// Linear extrapolation predicts, Newton corrects; the step halves whenever a
// correction moves farther than the jump threshold (0.1) or fails, and all
// trajectories share one parameter grid. Losing a pole entirely is a hard
// error carrying a winding-count diagnostic.
std::vector<Trajectory> track(const DoubleWellParams& params, const SweepSpec& sweep,
                              std::span<const Pole> seeds);

// Locate the attract/repel transition of exactly two trajectories on a
// common grid: the parameter of minimum pole gap, with each side classified
// by the windowed trends of |dE_r| and |dGamma|. nullopt when the gap is
// monotone over the sweep (no interior closest approach).
std::optional<TransitionReport> classify_regimes(std::span<const Trajectory> trajectories);

struct DoublePoleBox {
  double d_min, d_max;  // barrier thickness D
  double v_min, v_max;  // outer well depth V
};

struct DoublePoleResult {
  bool converged = false;
  double d = 0.0;
  double v = 0.0;
  Complex energy{0.0, 0.0};
  int winding = 0;        // on a radius-1e-6 circle about energy; 2 = double pole
  double residual = 0.0;  // |W| + |dW/dE| at the solution
  double min_gap = 0.0;   // closest two-pole approach seen while seeding
  int iterations = 0;
};

// Solve W(E; D, V) = 0 and dW/dE(E; D, V) = 0 jointly -- four real equations
// in (Re E, Im E, D, V) -- by Newton with a finite-difference Jacobian,
// seeded from the minimum-gap point of a coarse sweep over the box. On
// success the double pole is certified by the argument principle.
DoublePoleResult find_double_pole(const DoubleWellParams& base, const DoublePoleBox& box,
                                  const SearchRegion& seed_region = SearchRegion{});

// Exponent alpha fitted to |split(dv)| ~ dv^alpha where split(dv) is the
// distance between the two simple poles that the double pole separates into
// when V is perturbed by +/-dv. A clean double pole gives alpha = 0.5.
double unfolding_exponent(const DoubleWellParams& base, const DoublePoleResult& dp,
                          std::span<const double> dv_magnitudes);

}  // namespace dwell
