#include "multistitch/ransac.hpp"

#include <algorithm>

namespace multistitch {

std::vector<CandidateTransform> sequential_ransac(const std::vector<PointPair>& correspondences,
                                                  const SequentialRansacParams& params) {
  std::vector<CandidateTransform> out;
  if (correspondences.empty()) return out;

  std::vector<Vec2> deltas;
  deltas.reserve(correspondences.size());
  for (const auto& p : correspondences) deltas.push_back(implied_delta(p));
  std::vector<bool> used(deltas.size(), false);
  const double tol2 = params.inlier_tol * params.inlier_tol;
  const double total = static_cast<double>(deltas.size());

  while (static_cast<int>(out.size()) < params.max_sets) {
    std::size_t best_hyp = deltas.size();
    int best_count = 0;
    for (std::size_t h = 0; h < deltas.size(); ++h) {
      if (used[h]) continue;
      int count = 0;
      for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (!used[k] && (deltas[k] - deltas[h]).squaredNorm() <= tol2) ++count;
      }
      if (count > best_count) {
        best_count = count;
        best_hyp = h;
      }
    }
    if (best_hyp == deltas.size() || best_count < params.min_support) break;

    Vec2 mean = Vec2::Zero();
    std::vector<std::size_t> inliers;
    for (std::size_t k = 0; k < deltas.size(); ++k) {
      if (!used[k] && (deltas[k] - deltas[best_hyp]).squaredNorm() <= tol2) {
        inliers.push_back(k);
        mean += deltas[k];
      }
    }
    mean /= static_cast<double>(inliers.size());
    for (std::size_t k : inliers) used[k] = true;

    CandidateTransform c;
    c.delta = mean;
    c.support = static_cast<int>(inliers.size());
    c.score = static_cast<double>(inliers.size()) / total;
    out.push_back(c);
  }
  return out;
}

}  // namespace multistitch
