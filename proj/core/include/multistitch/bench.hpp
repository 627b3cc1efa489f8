#pragma once

#include "multistitch/prune_align.hpp"
#include "multistitch/registration.hpp"
#include "multistitch/solver.hpp"
#include "multistitch/synth.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace multistitch {

enum class Archetype { Tissue, Grid, Sparse };

std::optional<Archetype> parse_archetype(const std::string& name);
std::string to_string(Archetype archetype);

struct BenchScene {
  Archetype archetype = Archetype::Grid;
  SceneSpec scene;
  TileGridSpec grid;
};

/// Scene and tile grid of an archetype; `size` is the number of tile rows
/// and columns (0 picks the default: tissue 5, grid 7, sparse 6).
///  - tissue: two textured islands split by a blank vertical channel and
///    joined by one textured bridge row.
///  - grid: grid lines with a 20 px period over the whole canvas.
///  - sparse: strong blob islands, one per 2x2 tile block, over faint
///    low-contrast texture; each island carries a periodic band so that one
///    of its internal pairs is ambiguous.
BenchScene make_preset(Archetype archetype, int size, std::uint64_t seed);

struct BenchConfig {
  RegistrationParams registration;
  SolverConfig solver;
  double tau = 5.0;
  /// abs_threshold of the high-quality baseline; the low-quality baseline
  /// uses registration.peaks.abs_threshold.
  double hq_abs_threshold = 0.8;
  int threads = 1;

  /// Defaults used by the bench: registration defaults with room for a
  /// full 3x3 alias lattice inside the search window.
  static BenchConfig defaults();
};

/// Tiles plus the correlation surfaces all methods share.
struct PreparedScene {
  std::vector<TileNode> tiles;
  std::vector<PairSurface> surfaces;
  double registration_ms = 0.0;
};

PreparedScene prepare(const std::vector<TileNode>& tiles, const std::vector<Image>& images,
                      const BenchConfig& config);

struct MethodResult {
  std::string method;
  SimpleGraph simple;
  Alignment alignment;
  /// Pairs that had a correlation surface.
  int pairs = 0;
  /// Retained edges whose candidate is not the best-scoring one of its pair.
  int non_top = 0;
  double runtime_ms = 0.0;
  /// Solved multigraph (multigraph method only).
  std::optional<AlignmentMultigraph> graph;
};

/// Multigraph pipeline: candidates, constrained solve, prune, align.
MethodResult run_ours(const PreparedScene& scene, const BenchConfig& config);

/// Top-1 candidate per pair above `abs_threshold`, aligned directly.
MethodResult run_baseline(const PreparedScene& scene, double abs_threshold, const std::string& name,
                          const BenchConfig& config);

struct Metrics {
  std::optional<double> rms_internal;
  double rms_truth = 0.0;
  int edges = 0;
  /// Registered pairs that contribute no edge.
  int dropped = 0;
  int components = 0;
  int non_top = 0;
};

/// Root mean square over tiles of |(x_i - x_ref) - (t_i - t_ref)|, where
/// ref is the smallest tile of i's component. Throws
/// std::invalid_argument on mismatched tile counts.
double ground_truth_rms(const std::vector<Vec2>& offsets, const std::vector<Vec2>& truth,
                        const std::vector<std::vector<int>>& components);

Metrics evaluate(const MethodResult& result, const GroundTruth& truth);

struct BenchRow {
  std::string archetype;
  std::string method;
  Metrics metrics;
  double runtime_ms = 0.0;
};

/// Generates the archetype scene and runs ours, baseline-LQ and
/// baseline-HQ on it.
std::vector<BenchRow> run_bench(Archetype archetype, int size, std::uint64_t seed,
                                const BenchConfig& config);

/// Header plus one line per row: archetype, method, rms_internal,
/// rms_truth, edges, dropped, components, non_top, runtime_ms.
std::string bench_csv(const std::vector<BenchRow>& rows);
std::string bench_json(const std::vector<BenchRow>& rows);

}  // namespace multistitch
