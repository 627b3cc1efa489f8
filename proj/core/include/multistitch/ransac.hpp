#pragma once

#include "multistitch/graph.hpp"

#include <vector>

namespace multistitch {

/// One putative correspondence: the same scene point seen in tiles i and j.
struct PointPair {
  Vec2 in_i;
  Vec2 in_j;
};

/// Translation implied by a correspondence, as the position of tile j
/// relative to tile i.
inline Vec2 implied_delta(const PointPair& p) { return p.in_i - p.in_j; }

struct SequentialRansacParams {
  double inlier_tol = 2.0;
  int min_support = 3;
  int max_sets = 8;
};

/// Multiple consensus sets for a pure translation model.
///
/// Every remaining correspondence is tried as a one-point hypothesis (the
/// search is exhaustive, hence deterministic); the largest consensus set
/// wins, its mean translation becomes a candidate, its inliers are removed
/// and the search repeats until the best set falls below `min_support` or
/// `max_sets` candidates exist. Score is the inlier fraction of the
/// original input.
std::vector<CandidateTransform> sequential_ransac(const std::vector<PointPair>& correspondences,
                                                  const SequentialRansacParams& params);

}  // namespace multistitch
