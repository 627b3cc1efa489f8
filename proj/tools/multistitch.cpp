// multistitch command-line front end.

#include "multistitch/bench.hpp"
#include "multistitch/compose.hpp"
#include "multistitch/errors.hpp"
#include "multistitch/graph.hpp"
#include "multistitch/graphviz.hpp"
#include "multistitch/manifest.hpp"
#include "multistitch/prune_align.hpp"
#include "multistitch/registration.hpp"
#include "multistitch/solver.hpp"
#include "multistitch/synth.hpp"

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ms = multistitch;
namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kSchema = 3, kPipeline = 4 };

struct Options {
  // registration
  std::string manifest;
  int threads = 1;
  int min_overlap = 0;  // 0 keeps the manifest's value
  double abs_threshold = 0.5;
  double rel_threshold = 0.7;
  int nms_radius = 3;
  int max_candidates = 8;
  int search_radius = 32;
  int window_radius = 16;
  // solver
  double tau = 5.0;
  bool tau_set = false;
  std::string mode = "lm";
  int max_iterations = 500;
  // render
  std::string blend = "overwrite";
  int margin = 16;
  // bench / synth
  std::string archetype;
  int size = 0;
  std::uint64_t seed = 1;
  double hq_threshold = 0.8;
  std::string json_out;
  // files
  std::string input;
  std::string alignment;
  std::string output;
  std::string report;
  std::string out_dir;
  bool pruned = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ms::IoError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ms::IoError("cannot write " + path);
  out << text;
  if (!out) throw ms::IoError("failed writing " + path);
}

ms::RegistrationParams registration_params(const Options& o) {
  ms::RegistrationParams p;
  p.features.window_radius = o.window_radius;
  p.correlation.search_radius = o.search_radius;
  p.peaks.abs_threshold = o.abs_threshold;
  p.peaks.rel_threshold = o.rel_threshold;
  p.peaks.nms_radius = o.nms_radius;
  p.peaks.max_candidates = o.max_candidates;
  return p;
}

ms::SolverConfig solver_config(const Options& o) {
  ms::SolverConfig c;
  const auto mode = ms::parse_solver_mode(o.mode);
  if (!mode) throw std::invalid_argument("unknown solver mode '" + o.mode + "'");
  c.mode = *mode;
  c.max_iterations = o.max_iterations;
  if (o.tau_set) c.tau = o.tau;
  c.validate();
  return c;
}

ms::AlignmentMultigraph register_tiles(const Options& o) {
  const ms::TileManifest manifest = ms::load_manifest(o.manifest);
  const auto images = ms::load_tile_images(manifest);
  auto params = registration_params(o);
  params.min_overlap_px = o.min_overlap > 0 ? o.min_overlap : manifest.min_overlap_px;
  const auto pairs = ms::overlapping_pairs(manifest.tiles, images, params);
  if (pairs.empty()) throw ms::PipelineError("no overlapping pairs");
  spdlog::info("registering {} tile pairs on {} thread(s)", pairs.size(), o.threads);
  const auto surfaces = ms::compute_surfaces(manifest.tiles, images, pairs, params, o.threads);
  return ms::build_multigraph(manifest.tiles, surfaces, params.peaks, o.tau);
}

ms::SolveReport solve_graph(ms::AlignmentMultigraph& graph, const Options& o) {
  const auto config = solver_config(o);
  const auto report = ms::solve(graph, config);
  if (config.tau) graph.set_tau(*config.tau);
  ms::apply_solution(graph, report);
  spdlog::info("solver: {} iterations, loss {:.6g}, {}", report.iterations, report.loss,
               report.converged ? "converged" : "iteration limit");
  return report;
}

ms::BlendMode blend_mode(const std::string& name) {
  if (name == "overwrite") return ms::BlendMode::Overwrite;
  if (name == "feather") return ms::BlendMode::Feather;
  throw std::invalid_argument("unknown blend mode '" + name + "'");
}

void render_composite(const ms::TileManifest& manifest, const std::vector<ms::Vec2>& offsets,
                      const Options& o, const std::string& path) {
  if (offsets.size() != manifest.tiles.size())
    throw ms::SchemaError("alignment has " + std::to_string(offsets.size()) + " offsets for " +
                          std::to_string(manifest.tiles.size()) + " tiles");
  const auto images = ms::load_tile_images(manifest);
  const auto layout = ms::make_layout(offsets, images, blend_mode(o.blend), o.margin);
  ms::save_png8(ms::render(layout, images), path);
  spdlog::info("composite {}x{} written to {}", layout.width, layout.height, path);
}

int cmd_register(const Options& o) {
  const auto graph = register_tiles(o);
  write_file(o.output, ms::serialize(graph));
  return kOk;
}

int cmd_solve(const Options& o) {
  auto graph = ms::load_graph(o.input);
  const auto report = solve_graph(graph, o);
  write_file(o.output, ms::serialize(graph));
  if (!o.report.empty()) write_file(o.report, ms::report_to_json(graph, report));
  return kOk;
}

int cmd_align(const Options& o) {
  const auto graph = ms::load_graph(o.input);
  if (!graph.solved()) throw ms::PipelineError("graph has not been solved; run 'solve' first");
  const auto alignment = ms::align(ms::prune(graph));
  write_file(o.output, ms::alignment_to_json(alignment));
  return kOk;
}

int cmd_render(const Options& o) {
  const auto manifest = ms::load_manifest(o.manifest);
  const auto offsets = ms::offsets_from_alignment_json(read_file(o.alignment));
  render_composite(manifest, offsets, o, o.output);
  return kOk;
}

int cmd_graphviz(const Options& o) {
  const auto graph = ms::load_graph(o.input);
  if (o.pruned && !graph.solved()) throw ms::PipelineError("pruned view needs a solved graph");
  write_file(o.output, ms::to_dot(graph, o.pruned));
  return kOk;
}

int cmd_bench(const Options& o) {
  const auto archetype = ms::parse_archetype(o.archetype);
  if (!archetype) throw std::invalid_argument("unknown archetype '" + o.archetype + "'");
  auto config = ms::BenchConfig::defaults();
  config.tau = o.tau;
  config.threads = o.threads;
  config.hq_abs_threshold = o.hq_threshold;
  config.solver = solver_config(o);
  config.solver.tau.reset();
  const auto rows = ms::run_bench(*archetype, o.size, o.seed, config);
  write_file(o.output, ms::bench_csv(rows));
  if (!o.json_out.empty()) write_file(o.json_out, ms::bench_json(rows));
  return kOk;
}

int cmd_synth(const Options& o) {
  const auto archetype = ms::parse_archetype(o.archetype);
  if (!archetype) throw std::invalid_argument("unknown archetype '" + o.archetype + "'");
  const auto preset = ms::make_preset(*archetype, o.size, o.seed);
  const auto tiles = ms::cut_tiles(ms::generate_scene(preset.scene), preset.grid);
  const auto manifest = ms::write_tileset(tiles, o.out_dir, 32);
  nlohmann::json truth = {{"rows", tiles.truth.rows},
                          {"cols", tiles.truth.cols},
                          {"overlap", tiles.truth.overlap},
                          {"jitter_sigma", tiles.truth.jitter_sigma},
                          {"noise_sigma", tiles.truth.noise_sigma}};
  truth["true_offsets"] = nlohmann::json::array();
  for (const auto& t : tiles.truth.true_offsets) truth["true_offsets"].push_back({t.x(), t.y()});
  write_file((fs::path(o.out_dir) / "truth.json").string(), truth.dump(2) + "\n");
  spdlog::info("wrote {} tiles and {}", tiles.tiles.size(), manifest);
  return kOk;
}

int cmd_pipeline(const Options& o) {
  fs::create_directories(o.out_dir);
  const auto out = [&](const char* name) { return (fs::path(o.out_dir) / name).string(); };
  auto graph = register_tiles(o);
  write_file(out("graph.json"), ms::serialize(graph));
  const auto report = solve_graph(graph, o);
  write_file(out("solved.json"), ms::serialize(graph));
  write_file(out("report.json"), ms::report_to_json(graph, report));
  const auto alignment = ms::align(ms::prune(graph));
  write_file(out("alignment.json"), ms::alignment_to_json(alignment));
  render_composite(ms::load_manifest(o.manifest), alignment.offsets, o, out("composite.png"));
  return kOk;
}

void add_registration_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--threads", o.threads, "Worker threads for pair registration")->check(CLI::Range(1, 256));
  cmd->add_option("--min-overlap", o.min_overlap, "Minimum nominal overlap in pixels (default: manifest)");
  cmd->add_option("--abs-threshold", o.abs_threshold, "Absolute correlation threshold");
  cmd->add_option("--rel-threshold", o.rel_threshold, "Threshold relative to the best peak");
  cmd->add_option("--nms-radius", o.nms_radius, "Peak suppression radius in pixels");
  cmd->add_option("--max-candidates", o.max_candidates, "Candidates kept per pair")->check(CLI::PositiveNumber);
  cmd->add_option("--search-radius", o.search_radius, "Search radius in pixels")->check(CLI::PositiveNumber);
  cmd->add_option("--window-radius", o.window_radius, "Correlation window radius in pixels")
      ->check(CLI::PositiveNumber);
}

void add_solver_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--mode", o.mode, "Solver: lm or gd")->check(CLI::IsMember({"lm", "gd"}));
  cmd->add_option("--max-iterations", o.max_iterations, "Solver iteration limit");
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("multistitch"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Tile stitching with multi-candidate registration"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  auto tau_option = [&](CLI::App* cmd) {
    cmd->add_option_function<double>("--tau", [&](double t) { o.tau = t; o.tau_set = true; },
                                     "Dummy-edge threshold in pixels")
        ->check(CLI::PositiveNumber);
  };

  auto* reg = app.add_subcommand("register", "Build the candidate multigraph from a tile manifest");
  reg->add_option("manifest", o.manifest, "Tile manifest JSON")->required();
  reg->add_option("-o,--output", o.output, "Graph JSON (default: stdout)");
  tau_option(reg);
  add_registration_flags(reg, o);

  auto* sol = app.add_subcommand("solve", "Run the constrained multigraph solver");
  sol->add_option("graph", o.input, "Graph JSON")->required();
  sol->add_option("-o,--output", o.output, "Solved graph JSON (default: stdout)");
  sol->add_option("--report", o.report, "Write the solve report JSON here");
  tau_option(sol);
  add_solver_flags(sol, o);

  auto* aln = app.add_subcommand("align", "Prune a solved graph and compute global offsets");
  aln->add_option("graph", o.input, "Solved graph JSON")->required();
  aln->add_option("-o,--output", o.output, "Alignment JSON (default: stdout)");

  auto* ren = app.add_subcommand("render", "Render the composite image");
  ren->add_option("manifest", o.manifest, "Tile manifest JSON")->required();
  ren->add_option("alignment", o.alignment, "Alignment JSON")->required();
  ren->add_option("-o,--output", o.output, "Output PNG")->required();
  ren->add_option("--blend", o.blend, "overwrite or feather")->check(CLI::IsMember({"overwrite", "feather"}));
  ren->add_option("--margin", o.margin, "Feather margin in pixels");

  auto* dot = app.add_subcommand("graphviz", "Export a graph as Graphviz DOT");
  dot->add_option("graph", o.input, "Graph JSON")->required();
  dot->add_option("-o,--output", o.output, "DOT file (default: stdout)");
  dot->add_flag("--pruned", o.pruned, "Show only the retained edge of each bundle");

  auto* ben = app.add_subcommand("bench", "Compare the multigraph solver with top-1 baselines");
  ben->add_option("archetype", o.archetype, "tissue, grid or sparse")
      ->required()
      ->check(CLI::IsMember({"tissue", "grid", "sparse"}));
  ben->add_option("--size", o.size, "Tiles per side (default per archetype)");
  ben->add_option("--seed", o.seed, "Random seed");
  ben->add_option("--threads", o.threads, "Worker threads for pair registration")->check(CLI::Range(1, 256));
  ben->add_option("--hq-threshold", o.hq_threshold, "abs_threshold of the high-quality baseline");
  ben->add_option("-o,--output", o.output, "CSV file (default: stdout)");
  ben->add_option("--json", o.json_out, "Also write the report as JSON");
  tau_option(ben);
  add_solver_flags(ben, o);

  auto* syn = app.add_subcommand("synth", "Write a synthetic tile set with ground truth");
  syn->add_option("archetype", o.archetype, "tissue, grid or sparse")
      ->required()
      ->check(CLI::IsMember({"tissue", "grid", "sparse"}));
  syn->add_option("--size", o.size, "Tiles per side (default per archetype)");
  syn->add_option("--seed", o.seed, "Random seed");
  syn->add_option("--out-dir", o.out_dir, "Output directory")->required();

  auto* pip = app.add_subcommand("pipeline", "Register, solve, align and render in one go");
  pip->add_option("manifest", o.manifest, "Tile manifest JSON")->required();
  pip->add_option("--out-dir", o.out_dir, "Output directory")->required();
  pip->add_option("--blend", o.blend, "overwrite or feather")->check(CLI::IsMember({"overwrite", "feather"}));
  pip->add_option("--margin", o.margin, "Feather margin in pixels");
  tau_option(pip);
  add_registration_flags(pip, o);
  add_solver_flags(pip, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*reg) return cmd_register(o);
    if (*sol) return cmd_solve(o);
    if (*aln) return cmd_align(o);
    if (*ren) return cmd_render(o);
    if (*dot) return cmd_graphviz(o);
    if (*ben) return cmd_bench(o);
    if (*syn) return cmd_synth(o);
    if (*pip) return cmd_pipeline(o);
  } catch (const ms::IoError& e) {
    spdlog::error("{}", e.what());
    return kIo;
  } catch (const ms::SchemaError& e) {
    spdlog::error("{}", e.what());
    return kSchema;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kPipeline;
  }
  return kUsage;
}
