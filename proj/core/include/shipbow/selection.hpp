#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "shipbow/dog.hpp"
#include "shipbow/image.hpp"

namespace shipbow {

/// Knobs of the dispersion-constrained keypoint selector.
struct SelectionParams {
  double dist_th = 15.0;    // DistTH: pixels
  int min_over = 2;         // minOver: tolerated number of close, already-selected points
  int top_n = 100;          // TopN: selection target
  int score_half_width = 3; // 7x7 scoring window
  int base_patch = 64;
  int enlarged_patch = 128;

  void validate() const;
};

struct ScoredKeypoint {
  Keypoint keypoint;
  double score = 0.0;
};

struct SelectedPoint {
  ScoredKeypoint point;
  bool enlarged = false;
};

struct SelectionResult {
  std::vector<SelectedPoint> selected;
  std::size_t found_n = 0;
  std::size_t remain_n = 0;
};

/// Scores each point by the gradient energy of its window and sorts by score
/// descending, ties by (y, x) ascending. Throws PointOutOfBounds.
std::vector<ScoredKeypoint> score_and_sort(const GradientField& field, std::span<const Keypoint> points,
                                           int half_width);

/// Single greedy pass over the ordered candidates.
///
/// The first candidate seeds the selection. Every later candidate p is
/// accepted when at most `min_over` of the points selected so far lie within
/// `dist_th` of it, which is the same as requiring that at least
/// |S| - min_over selected points are farther than `dist_th`. Distances are
/// Euclidean in image pixels and "farther" is strict. The pass stops once
/// `top_n` points are selected or the candidates run out.
SelectionResult greedy_select(std::span<const ScoredKeypoint> ordered, const SelectionParams& params);

/// Fills a first-pass shortfall up to top_n by repeating the leading selected
/// points (cycling if needed) flagged as enlarged.
SelectionResult augment_remainder(SelectionResult first_pass, const SelectionParams& params);

}  // namespace shipbow
