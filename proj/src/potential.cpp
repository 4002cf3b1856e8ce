#include "dwell/potential.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dwell {

PotentialSpec::PotentialSpec(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) return;
  if (segments_.front().left_edge != 0.0)
    throw std::invalid_argument("PotentialSpec: first segment must start at the wall x=0");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (!(s.width() > 0.0) || !std::isfinite(s.width()))
      throw std::invalid_argument("PotentialSpec: segment " + std::to_string(i) +
                                  " has non-positive width");
    if (!std::isfinite(s.height))
      throw std::invalid_argument("PotentialSpec: segment " + std::to_string(i) +
                                  " has non-finite height");
    if (i > 0 && segments_[i - 1].right_edge != s.left_edge)
      throw std::invalid_argument("PotentialSpec: segments must be contiguous");
  }
}

double PotentialSpec::last_edge() const {
  return segments_.empty() ? 0.0 : segments_.back().right_edge;
}

std::optional<std::size_t> PotentialSpec::segment_index(double x) const {
  if (x < 0.0 || !std::isfinite(x))
    throw std::invalid_argument("segment_index: x must be finite and >= 0");
  if (segments_.empty() || x > last_edge()) return std::nullopt;
  if (x <= segments_.front().right_edge) return 0;  // covers the wall point x=0
  // first segment with right_edge >= x; left-open intervals make the strict
  // comparison below pick the segment to the left of an exact edge hit
  std::size_t lo = 0, hi = segments_.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (segments_[mid].right_edge < x)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

double PotentialSpec::potential_at(double x) const {
  auto idx = segment_index(x);
  return idx ? segments_[*idx].height : 0.0;
}

SegmentLookup segment_at(const PotentialSpec& spec, double x) {
  auto idx = spec.segment_index(x);
  return {idx, idx ? spec.segments()[*idx].height : 0.0};
}

void DoubleWellParams::validate() const {
  auto bad = [](double v) { return !std::isfinite(v); };
  if (bad(v1) || bad(v2) || bad(v3) || bad(v4) || bad(x1) ||
      bad(barrier_thickness) || bad(outer_well_width) || bad(outer_barrier_width))
    throw std::invalid_argument("DoubleWellParams: non-finite parameter");
  if (!(x1 > 0.0))
    throw std::invalid_argument("DoubleWellParams: inner well width x1 must be > 0");
  if (barrier_thickness < 0.0)
    throw std::invalid_argument("DoubleWellParams: barrier thickness D must be >= 0");
  if (!(outer_well_width > 0.0))
    throw std::invalid_argument("DoubleWellParams: outer well width must be > 0");
  if (!(outer_barrier_width > 0.0))
    throw std::invalid_argument("DoubleWellParams: outer barrier width must be > 0");
}

PotentialSpec build_double_well(const DoubleWellParams& p) {
  p.validate();
  std::vector<Segment> segs;
  segs.reserve(4);
  double edge = 0.0;
  auto push = [&](double width, double height) {
    segs.push_back({edge, edge + width, height});
    edge += width;
  };
  push(p.x1, p.v1);
  if (p.barrier_thickness > 0.0) push(p.barrier_thickness, p.v2);
  push(p.outer_well_width, p.v3);
  push(p.outer_barrier_width, p.v4);
  return PotentialSpec(std::move(segs));
}

DoubleWellParams double_well_params(const PotentialSpec& spec) {
  const auto& s = spec.segments();
  if (s.size() != 4)
    throw std::invalid_argument("double_well_params: expected a 4-segment double well");
  DoubleWellParams p;
  p.v1 = s[0].height;
  p.v2 = s[1].height;
  p.v3 = s[2].height;
  p.v4 = s[3].height;
  p.x1 = s[0].right_edge;
  p.barrier_thickness = s[1].right_edge - s[1].left_edge;
  p.outer_well_width = s[2].right_edge - s[2].left_edge;
  p.outer_barrier_width = s[3].right_edge - s[3].left_edge;
  return p;
}

}  // namespace dwell
