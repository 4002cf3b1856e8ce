#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace dwell {

// One constant-potential piece of the half-line potential. Segments use the
// left-open, right-closed convention ]left_edge, right_edge], so a point
// sitting exactly on an interior edge belongs to the segment to its left.
struct Segment {
  double left_edge = 0.0;
  double right_edge = 0.0;
  double height = 0.0;

  double width() const { return right_edge - left_edge; }
};

// Piecewise-constant potential on x >= 0 with a hard wall at x = 0 and
// V = 0 beyond the last edge. Segments must be contiguous, start at 0 and
// have strictly positive width. An empty segment list is valid and means
// free motion next to the wall.
class PotentialSpec {
 public:
  PotentialSpec() = default;
  explicit PotentialSpec(std::vector<Segment> segments);

  const std::vector<Segment>& segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }

  // Rightmost edge; 0 when there are no segments.
  double last_edge() const;

  // Index of the segment containing x (]l,r] convention), or nullopt for the
  // exterior. x = 0 maps to the first segment. Throws for x < 0.
  std::optional<std::size_t> segment_index(double x) const;

  // Potential value at x, 0 in the exterior. Throws for x < 0.
  double potential_at(double x) const;

 private:
  std::vector<Segment> segments_;
};

struct SegmentLookup {
  std::optional<std::size_t> index;  // nullopt = exterior
  double potential = 0.0;
};

SegmentLookup segment_at(const PotentialSpec& spec, double x);

// The double-well geometry: hard wall, inner well of width x1 and bottom v1,
// inner barrier of thickness D and height v2, outer well (width w, bottom v3),
// outer barrier (width w, height v4), free space beyond. D = 0 is allowed and
// drops the inner-barrier segment entirely.
struct DoubleWellParams {
  double v1 = 0.0;
  double v2 = 4.0;
  double v3 = 1.04;
  double v4 = 4.0;
  double x1 = 1.0;
  double barrier_thickness = 2.0;   // D = x2 - x1
  double outer_well_width = 1.0;    // x3 - x2
  double outer_barrier_width = 0.3; // x4 - x3

  // Throws std::invalid_argument on non-positive widths or D < 0.
  void validate() const;
};

PotentialSpec build_double_well(const DoubleWellParams& params);

// Inverse of build_double_well for a 4-segment spec (D > 0). Exact: the edge
// arithmetic in build_double_well is reproduced bit for bit.
DoubleWellParams double_well_params(const PotentialSpec& spec);

}  // namespace dwell
