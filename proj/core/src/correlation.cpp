#include "multistitch/correlation.hpp"

#include "multistitch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace multistitch {

CorrelationSurface::CorrelationSurface(Pixel origin, int search_radius)
    : origin_(std::move(origin)), radius_(search_radius) {
  if (search_radius < 0) throw std::invalid_argument("negative search radius");
  const auto n = static_cast<std::size_t>(side()) * static_cast<std::size_t>(side());
  values_.assign(n, undefined());
  support_.assign(n, 0);
}

namespace {

// Relative threshold below which a window's centred sum of squares counts as
// zero variance.
constexpr double kZeroVariance = 1e-12;

}  // namespace

CorrelationSurface correlation_surface(const Image& a, const Image& b, const FeatureSet& features,
                                       const Pixel& delta0, const CorrelationParams& params) {
  if (features.points.empty()) throw std::invalid_argument("correlation needs at least one feature");
  const int r = features.window_radius;
  const int R = params.search_radius;
  const int win = 2 * r + 1;
  const int side = 2 * R + 1;
  const double n = static_cast<double>(win) * win;

  CorrelationSurface surface(delta0, R);
  std::vector<double> sums(static_cast<std::size_t>(side) * side, 0.0);
  std::vector<int> counts(static_cast<std::size_t>(side) * side, 0);
  bool any_fit = false;
  int usable = 0;

  // Region of B covering all windows of one feature, as doubles.
  const int region = side + win - 1;
  std::vector<double> breg(static_cast<std::size_t>(region) * region);
  std::vector<double> col_sum(static_cast<std::size_t>(region) * side);
  std::vector<double> col_sq(static_cast<std::size_t>(region) * side);
  std::vector<double> templ(static_cast<std::size_t>(win) * win);

  // Window centres in B span [p - delta0 - R, p - delta0 + R] per axis.
  auto fits_somewhere = [&](int centre, int extent) {
    return centre + R >= r && centre - R <= extent - 1 - r;
  };

  for (const Pixel& p : features.points) {
    if (p.x() - r < 0 || p.y() - r < 0 || p.x() + r >= a.width() || p.y() + r >= a.height()) {
      throw std::invalid_argument("feature window leaves image A");
    }
    if (fits_somewhere(p.x() - delta0.x(), b.width()) && fits_somewhere(p.y() - delta0.y(), b.height())) {
      any_fit = true;
    }
    double mean_a = 0.0;
    double sq_a = 0.0;
    for (int v = -r; v <= r; ++v) {
      for (int u = -r; u <= r; ++u) {
        const double val = a(p.x() + u, p.y() + v);
        mean_a += val;
        sq_a += val * val;
      }
    }
    mean_a /= n;
    double ss_a = 0.0;
    for (int v = 0; v < win; ++v) {
      for (int u = 0; u < win; ++u) {
        const double c = a(p.x() - r + u, p.y() - r + v) - mean_a;
        templ[static_cast<std::size_t>(v * win + u)] = c;
        ss_a += c * c;
      }
    }
    if (!(ss_a > kZeroVariance * sq_a) || ss_a == 0.0) continue;
    ++usable;

    // Window centre for shift d is p - delta0 - d; the region starts at the
    // top-left corner of the window for d = (+R, +R).
    const int rx0 = p.x() - delta0.x() - R - r;
    const int ry0 = p.y() - delta0.y() - R - r;
    for (int y = 0; y < region; ++y) {
      for (int x = 0; x < region; ++x) {
        const int bx = rx0 + x;
        const int by = ry0 + y;
        breg[static_cast<std::size_t>(y * region + x)] =
            b.contains(bx, by) ? static_cast<double>(b(bx, by)) : 0.0;
      }
    }
    // Vertical window sums for every column and window top.
    for (int top = 0; top < side; ++top) {
      for (int x = 0; x < region; ++x) {
        double s = 0.0;
        double q = 0.0;
        for (int v = 0; v < win; ++v) {
          const double val = breg[static_cast<std::size_t>((top + v) * region + x)];
          s += val;
          q += val * val;
        }
        col_sum[static_cast<std::size_t>(top * region + x)] = s;
        col_sq[static_cast<std::size_t>(top * region + x)] = q;
      }
    }

    for (int dy = -R; dy <= R; ++dy) {
      const int cy = p.y() - delta0.y() - dy;
      if (cy - r < 0 || cy + r >= b.height()) continue;
      const int top = R - dy;  // region row of the window top
      for (int dx = -R; dx <= R; ++dx) {
        const int cx = p.x() - delta0.x() - dx;
        if (cx - r < 0 || cx + r >= b.width()) continue;
        const int left = R - dx;
        double s = 0.0;
        double q = 0.0;
        for (int u = 0; u < win; ++u) {
          s += col_sum[static_cast<std::size_t>(top * region + left + u)];
          q += col_sq[static_cast<std::size_t>(top * region + left + u)];
        }
        const double ss_b = q - s * s / n;
        if (!(ss_b > kZeroVariance * q)) continue;
        double cross = 0.0;
        for (int v = 0; v < win; ++v) {
          const double* brow = &breg[static_cast<std::size_t>((top + v) * region + left)];
          const double* trow = &templ[static_cast<std::size_t>(v * win)];
          double acc = 0.0;
          for (int u = 0; u < win; ++u) acc += trow[u] * brow[u];
          cross += acc;
        }
        const double rho = std::clamp(cross / std::sqrt(ss_a * ss_b), -1.0, 1.0);
        const auto cell = static_cast<std::size_t>((dy + R) * side + (dx + R));
        sums[cell] += rho;
        counts[cell] += 1;
      }
    }
  }
  if (!any_fit) throw PipelineError("correlation search range lies entirely outside image B");

  surface.set_n_features(usable);
  const int min_count =
      std::max(1, static_cast<int>(std::ceil(params.min_valid_fraction * usable - 1e-12)));
  for (int dy = -R; dy <= R; ++dy) {
    for (int dx = -R; dx <= R; ++dx) {
      const auto cell = static_cast<std::size_t>((dy + R) * side + (dx + R));
      surface.support(dx, dy) = counts[cell];
      if (counts[cell] >= min_count) surface.at(dx, dy) = sums[cell] / counts[cell];
    }
  }
  return surface;
}

namespace {

// Vertex offset of the parabola through (-1, lo), (0, mid), (1, hi).
double parabola_offset(double lo, double mid, double hi) {
  const double denom = lo - 2.0 * mid + hi;
  if (!(denom < 0.0)) return 0.0;
  return std::clamp(0.5 * (lo - hi) / denom, -0.5, 0.5);
}

}  // namespace

std::vector<CandidateTransform> extract_candidates(const CorrelationSurface& surface,
                                                   const PeakParams& params) {
  const int R = surface.radius();
  double global_max = -std::numeric_limits<double>::infinity();
  for (int dy = -R; dy <= R; ++dy) {
    for (int dx = -R; dx <= R; ++dx) {
      if (surface.defined(dx, dy)) global_max = std::max(global_max, surface.at(dx, dy));
    }
  }
  if (!std::isfinite(global_max)) return {};
  const double threshold = std::max(params.abs_threshold, params.rel_threshold * global_max);

  struct Peak {
    int dx, dy;
    double value;
  };
  std::vector<Peak> peaks;
  for (int dy = -R + 1; dy <= R - 1; ++dy) {
    for (int dx = -R + 1; dx <= R - 1; ++dx) {
      if (!surface.defined(dx, dy)) continue;
      const double v = surface.at(dx, dy);
      if (v < threshold) continue;
      bool strict = true;
      for (int ny = -1; ny <= 1 && strict; ++ny) {
        for (int nx = -1; nx <= 1; ++nx) {
          if (nx == 0 && ny == 0) continue;
          if (!surface.defined(dx + nx, dy + ny) || surface.at(dx + nx, dy + ny) >= v) {
            strict = false;
            break;
          }
        }
      }
      if (strict) peaks.push_back({dx, dy, v});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.value > b.value; });

  std::vector<Peak> kept;
  for (const auto& pk : peaks) {
    if (static_cast<int>(kept.size()) >= params.max_candidates) break;
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Peak& k) {
      return std::max(std::abs(k.dx - pk.dx), std::abs(k.dy - pk.dy)) <= params.nms_radius;
    });
    if (!suppressed) kept.push_back(pk);
  }

  std::vector<CandidateTransform> out;
  out.reserve(kept.size());
  for (const auto& pk : kept) {
    const double l = surface.at(pk.dx - 1, pk.dy);
    const double rr = surface.at(pk.dx + 1, pk.dy);
    const double u = surface.at(pk.dx, pk.dy - 1);
    const double d = surface.at(pk.dx, pk.dy + 1);
    const double ox = parabola_offset(l, pk.value, rr);
    const double oy = parabola_offset(u, pk.value, d);
    // Peak height of each 1-D parabola, combined separably.
    const double refined =
        pk.value + 0.25 * (rr - l) * ox + 0.25 * (d - u) * oy;
    CandidateTransform c;
    c.delta = Vec2(surface.origin().x() + pk.dx + ox, surface.origin().y() + pk.dy + oy);
    c.score = std::clamp(refined, -1.0, 1.0);
    c.support = std::max(1, surface.support(pk.dx, pk.dy));
    out.push_back(c);
  }
  return out;
}

}  // namespace multistitch
