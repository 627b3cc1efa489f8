#include "multistitch/bench.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace multistitch {

namespace {

constexpr int kTile = 256;
constexpr int kOverlap = 64;
constexpr int kStep = kTile - kOverlap;
constexpr int kMargin = 16;
constexpr double kJitter = 2.0;
constexpr double kNoise = 4.0;
// Clearance between textured areas and overlaps meant to stay empty; covers
// three jitter sigmas.
constexpr int kClear = 12;
// Sparse archetype: faint strips reach this far past the block overlaps,
// islands stay this far inside them.
constexpr int kFaintPad = 8;
constexpr int kIslandInset = 24;

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// Scene rectangle from tile-grid coordinates (relative to the nominal origin).
Rect grid_rect(int x0, int y0, int x1, int y1) {
  return {kMargin + x0, kMargin + y0, x1 - x0, y1 - y0};
}

TextureRegion blobs(const Rect& r, double contrast) {
  TextureRegion t;
  t.kind = TextureKind::BlobNoise;
  t.bounds = r;
  t.contrast = contrast;
  return t;
}

void tissue_regions(SceneSpec& s, int n) {
  const int extent = (n - 1) * kStep + kTile;
  const int split = std::max(1, n / 2);
  const int row = n / 2;
  const int gap0 = split * kStep;  // overlap of columns split-1 and split
  const int gap1 = gap0 + kOverlap;
  s.regions.push_back(blobs(grid_rect(0, 0, gap0 - kClear - 2, extent), 120.0));
  s.regions.push_back(blobs(grid_rect(gap1 + kClear + 2, 0, extent, extent), 120.0));
  // Bridge inside the part of the bridge row no other row overlaps.
  s.regions.push_back(blobs(grid_rect(gap0 - kClear - 2, row * kStep + kOverlap + 8, gap1 + kClear + 2,
                                      row * kStep + kStep - 8),
                            120.0));
}

void grid_regions(SceneSpec& s) {
  TextureRegion t;
  t.kind = TextureKind::Periodic;
  t.period = 20;
  t.contrast = 120.0;
  t.bounds = {0, 0, s.width, s.height};
  s.regions.push_back(t);
}

void sparse_regions(SceneSpec& s, int n) {
  const int extent = (n - 1) * kStep + kTile;
  const int blocks = (n + 1) / 2;
  // Faint texture only along the overlaps between blocks, so that windows
  // straddling an island border see blank surroundings.
  for (int b = 1; b < blocks; ++b) {
    const int edge = 2 * b * kStep;
    const int lo = edge - kFaintPad;
    const int hi = std::min(extent, edge + kOverlap + kFaintPad);
    s.regions.push_back(blobs(grid_rect(lo, 0, hi, extent), 12.0));
    s.regions.push_back(blobs(grid_rect(0, lo, extent, hi), 12.0));
  }
  for (int bi = 0; bi < blocks; ++bi) {
    for (int bj = 0; bj < blocks; ++bj) {
      const int bx = 2 * bj * kStep;
      const int by = 2 * bi * kStep;
      const int x0 = bx + kOverlap + kIslandInset;
      const int y0 = by + kOverlap + kIslandInset;
      const int x1 = std::min(extent, bx + 2 * kStep - kIslandInset);
      const int y1 = std::min(extent, by + 2 * kStep - kIslandInset);
      if (x1 <= x0 || y1 <= y0) continue;
      s.regions.push_back(blobs(grid_rect(x0, y0, x1, y1), 120.0));
      // Periodic band over the top internal overlap of the block, wide
      // enough that windows shifted by one period stay inside it.
      const int px0 = std::max(x0, bx + kStep - 48);
      const int px1 = std::min(x1, bx + kTile + 48);
      const int py1 = std::min(y1, by + kTile);
      if (px1 - px0 < 40 || py1 <= y0) continue;
      TextureRegion band;
      band.kind = TextureKind::Periodic;
      band.period = 20;
      band.contrast = 120.0;
      band.bounds = grid_rect(px0, y0, px1, py1);
      s.regions.push_back(band);
    }
  }
}

}  // namespace

std::optional<Archetype> parse_archetype(const std::string& name) {
  if (name == "tissue") return Archetype::Tissue;
  if (name == "grid") return Archetype::Grid;
  if (name == "sparse") return Archetype::Sparse;
  return std::nullopt;
}

std::string to_string(Archetype archetype) {
  switch (archetype) {
    case Archetype::Tissue: return "tissue";
    case Archetype::Grid: return "grid";
    case Archetype::Sparse: return "sparse";
  }
  return "unknown";
}

BenchScene make_preset(Archetype archetype, int size, std::uint64_t seed) {
  if (size == 0) {
    size = archetype == Archetype::Tissue ? 5 : archetype == Archetype::Grid ? 7 : 6;
  }
  if (size < 2 || size > 10) throw std::invalid_argument("bench size must lie in [2, 10]");

  BenchScene out;
  out.archetype = archetype;
  out.grid.rows = size;
  out.grid.cols = size;
  out.grid.tile_size = kTile;
  out.grid.overlap = kOverlap;
  out.grid.jitter_sigma = kJitter;
  out.grid.noise_sigma = kNoise;
  out.grid.margin = kMargin;
  out.grid.seed = seed + 1;
  out.scene.width = out.grid.scene_width();
  out.scene.height = out.grid.scene_height();
  out.scene.seed = seed;
  switch (archetype) {
    case Archetype::Tissue: tissue_regions(out.scene, size); break;
    case Archetype::Grid: grid_regions(out.scene); break;
    case Archetype::Sparse: sparse_regions(out.scene, size); break;
  }
  return out;
}

BenchConfig BenchConfig::defaults() {
  BenchConfig c;
  c.registration.peaks.max_candidates = 16;
  return c;
}

PreparedScene prepare(const std::vector<TileNode>& tiles, const std::vector<Image>& images,
                      const BenchConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  PreparedScene out;
  out.tiles = tiles;
  const auto pairs = overlapping_pairs(tiles, images, config.registration);
  out.surfaces = compute_surfaces(tiles, images, pairs, config.registration, config.threads);
  out.registration_ms = elapsed_ms(start);
  return out;
}

namespace {

int count_surfaces(const PreparedScene& scene) {
  return static_cast<int>(std::count_if(scene.surfaces.begin(), scene.surfaces.end(),
                                        [](const PairSurface& p) { return p.surface.has_value(); }));
}

}  // namespace

MethodResult run_ours(const PreparedScene& scene, const BenchConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  MethodResult out;
  out.method = "ours";
  out.pairs = count_surfaces(scene);

  AlignmentMultigraph graph =
      build_multigraph(scene.tiles, scene.surfaces, config.registration.peaks, config.tau);
  SolverConfig solver = config.solver;
  solver.tau = config.tau;
  const SolveReport report = solve(graph, solver);
  apply_solution(graph, report);
  out.simple = prune(graph);
  out.alignment = align(out.simple);

  for (const auto& e : out.simple.edges) {
    const auto& cands = graph.bundles()[static_cast<std::size_t>(e.bundle)].candidates;
    const auto top = std::max_element(cands.begin(), cands.end(),
                                      [](const auto& a, const auto& b) { return a.score < b.score; });
    if (e.candidate != static_cast<int>(top - cands.begin()) + 1) ++out.non_top;
  }
  out.graph = std::move(graph);
  out.runtime_ms = scene.registration_ms + elapsed_ms(start);
  return out;
}

MethodResult run_baseline(const PreparedScene& scene, double abs_threshold, const std::string& name,
                          const BenchConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  MethodResult out;
  out.method = name;
  out.pairs = count_surfaces(scene);
  out.simple.nodes = scene.tiles;
  PeakParams peaks = config.registration.peaks;
  peaks.abs_threshold = abs_threshold;
  for (const auto& pair : scene.surfaces) {
    if (!pair.surface) continue;
    const auto cands = extract_candidates(*pair.surface, peaks);
    if (cands.empty()) continue;
    SimpleEdge e;
    e.i = pair.i;
    e.j = pair.j;
    e.delta = cands.front().delta;
    e.weight = 1.0;
    e.candidate = 1;
    out.simple.edges.push_back(e);
  }
  out.alignment = align(out.simple);
  out.runtime_ms = scene.registration_ms + elapsed_ms(start);
  return out;
}

double ground_truth_rms(const std::vector<Vec2>& offsets, const std::vector<Vec2>& truth,
                        const std::vector<std::vector<int>>& components) {
  if (offsets.size() != truth.size()) throw std::invalid_argument("tile sets differ");
  if (offsets.empty()) return 0.0;
  double sum = 0.0;
  std::size_t seen = 0;
  for (const auto& comp : components) {
    if (comp.empty()) continue;
    const auto ref = static_cast<std::size_t>(*std::min_element(comp.begin(), comp.end()));
    for (int id : comp) {
      const auto k = static_cast<std::size_t>(id);
      if (k >= offsets.size()) throw std::invalid_argument("component refers to an unknown tile");
      sum += ((offsets[k] - offsets[ref]) - (truth[k] - truth[ref])).squaredNorm();
      ++seen;
    }
  }
  if (seen != offsets.size()) throw std::invalid_argument("components do not cover every tile");
  return std::sqrt(sum / static_cast<double>(seen));
}

Metrics evaluate(const MethodResult& result, const GroundTruth& truth) {
  if (result.alignment.offsets.size() != truth.true_offsets.size())
    throw std::invalid_argument("result and ground truth cover different tile sets");
  Metrics m;
  m.rms_internal = result.alignment.rms;
  m.rms_truth = ground_truth_rms(result.alignment.offsets, truth.true_offsets,
                                 result.alignment.components);
  m.edges = static_cast<int>(result.simple.edges.size());
  m.dropped = result.pairs - m.edges;
  m.components = static_cast<int>(result.alignment.components.size());
  m.non_top = result.non_top;
  return m;
}

std::vector<BenchRow> run_bench(Archetype archetype, int size, std::uint64_t seed,
                                const BenchConfig& config) {
  const BenchScene preset = make_preset(archetype, size, seed);
  const Image scene = generate_scene(preset.scene);
  const TileSet tiles = cut_tiles(scene, preset.grid);
  spdlog::info("bench {}: {}x{} tiles", to_string(archetype), preset.grid.rows, preset.grid.cols);
  const PreparedScene prepared = prepare(tiles.tiles, tiles.images, config);

  std::vector<BenchRow> rows;
  auto add = [&](const MethodResult& r) {
    rows.push_back({to_string(archetype), r.method, evaluate(r, tiles.truth), r.runtime_ms});
  };
  add(run_ours(prepared, config));
  add(run_baseline(prepared, config.registration.peaks.abs_threshold, "baseline-LQ", config));
  add(run_baseline(prepared, config.hq_abs_threshold, "baseline-HQ", config));
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "archetype,method,rms_internal,rms_truth,edges,dropped,components,non_top,runtime_ms\n";
  for (const auto& r : rows) {
    char nums[160];
    std::snprintf(nums, sizeof nums, "%.4f,%d,%d,%d,%d,%.1f", r.metrics.rms_truth, r.metrics.edges,
                  r.metrics.dropped, r.metrics.components, r.metrics.non_top, r.runtime_ms);
    char internal[32] = "nan";
    if (r.metrics.rms_internal) std::snprintf(internal, sizeof internal, "%.4f", *r.metrics.rms_internal);
    out << r.archetype << ',' << r.method << ',' << internal << ',' << nums << '\n';
  }
  return out.str();
}

std::string bench_json(const std::vector<BenchRow>& rows) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row = {{"archetype", r.archetype},
                          {"method", r.method},
                          {"rms_truth", r.metrics.rms_truth},
                          {"edges", r.metrics.edges},
                          {"dropped", r.metrics.dropped},
                          {"components", r.metrics.components},
                          {"non_top", r.metrics.non_top},
                          {"runtime_ms", r.runtime_ms}};
    row["rms_internal"] = r.metrics.rms_internal ? nlohmann::json(*r.metrics.rms_internal) : nlohmann::json();
    doc.push_back(row);
  }
  return doc.dump(2) + "\n";
}

}  // namespace multistitch
