#include "shipbow/selection.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "shipbow/error.hpp"

namespace shipbow {

void SelectionParams::validate() const {
  if (!(dist_th > 0.0)) throw Error(Errc::InvalidArgument, "dist_th must be > 0");
  if (min_over < 0) throw Error(Errc::InvalidArgument, "min_over must be >= 0");
  if (top_n < 1) throw Error(Errc::InvalidArgument, "top_n must be >= 1");
  if (score_half_width < 0) throw Error(Errc::InvalidArgument, "score_half_width must be >= 0");
  if (base_patch < 8) throw Error(Errc::InvalidArgument, "base_patch must be >= 8");
  if (!(base_patch < enlarged_patch)) throw Error(Errc::InvalidArgument, "base_patch must be < enlarged_patch");
}

std::vector<ScoredKeypoint> score_and_sort(const GradientField& field, std::span<const Keypoint> points,
                                           int half_width) {
  std::vector<ScoredKeypoint> scored;
  scored.reserve(points.size());
  for (const auto& kp : points) {
    if (!(kp.x >= 0.0 && kp.y >= 0.0 && kp.x < field.width() && kp.y < field.height()))
      throw Error(Errc::PointOutOfBounds, "keypoint outside gradient field");
    scored.push_back({kp, window_gradient_sum(field, kp.pixel(field.width(), field.height()), half_width)});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const ScoredKeypoint& a, const ScoredKeypoint& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.keypoint.y, a.keypoint.x) < std::tie(b.keypoint.y, b.keypoint.x);
  });
  return scored;
}

SelectionResult greedy_select(std::span<const ScoredKeypoint> ordered, const SelectionParams& params) {
  params.validate();
  SelectionResult result;
  if (ordered.empty()) return result;

  const auto target = static_cast<std::size_t>(params.top_n);
  const double limit2 = params.dist_th * params.dist_th;
  result.selected.push_back({ordered.front(), false});

  for (std::size_t i = 1; i < ordered.size() && result.selected.size() < target; ++i) {
    const Keypoint& p = ordered[i].keypoint;
    int close = 0;
    for (const auto& s : result.selected) {
      const double dx = s.point.keypoint.x - p.x;
      const double dy = s.point.keypoint.y - p.y;
      if (dx * dx + dy * dy <= limit2 && ++close > params.min_over) break;
    }
    if (close <= params.min_over) result.selected.push_back({ordered[i], false});
  }
  result.found_n = result.selected.size();
  return result;
}

SelectionResult augment_remainder(SelectionResult first_pass, const SelectionParams& params) {
  const auto target = static_cast<std::size_t>(params.top_n);
  const std::size_t found = first_pass.found_n;
  if (found == 0 || found >= target) {
    first_pass.remain_n = 0;
    return first_pass;
  }
  first_pass.remain_n = target - found;
  first_pass.selected.reserve(target);
  for (std::size_t i = 0; i < first_pass.remain_n; ++i)
    first_pass.selected.push_back({first_pass.selected[i % found].point, true});
  return first_pass;
}

}  // namespace shipbow
