#include "actclust/synthdigits.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "actclust/errors.hpp"
#include "actclust/rng.hpp"

namespace actclust {

namespace {

struct Pt {
    double x;
    double y;
};

using Polyline = std::vector<Pt>;

std::vector<Polyline> ellipse(double cx, double cy, double rx, double ry, int segments = 16) {
    Polyline p;
    p.reserve(static_cast<std::size_t>(segments) + 1);
    for (int i = 0; i <= segments; ++i) {
        const double t = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(segments);
        p.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
    }
    return {p};
}

// Glyphs live on the unit square, y pointing down, matching image layout.
const std::array<std::vector<Polyline>, 10>& glyphs() {
    static const std::array<std::vector<Polyline>, 10> g = [] {
        std::array<std::vector<Polyline>, 10> a;
        a[0] = ellipse(0.50, 0.50, 0.26, 0.38);
        a[1] = {{{0.38, 0.26}, {0.52, 0.12}, {0.52, 0.88}}, {{0.36, 0.88}, {0.68, 0.88}}};
        a[2] = {{{0.28, 0.32},
                 {0.32, 0.20},
                 {0.44, 0.12},
                 {0.58, 0.12},
                 {0.70, 0.20},
                 {0.72, 0.32},
                 {0.66, 0.46},
                 {0.46, 0.64},
                 {0.28, 0.88},
                 {0.74, 0.88}}};
        a[3] = {{{0.28, 0.18},
                 {0.44, 0.12},
                 {0.60, 0.14},
                 {0.70, 0.24},
                 {0.68, 0.38},
                 {0.54, 0.47},
                 {0.68, 0.56},
                 {0.72, 0.70},
                 {0.62, 0.84},
                 {0.44, 0.88},
                 {0.28, 0.80}}};
        a[4] = {{{0.58, 0.12}, {0.26, 0.60}, {0.78, 0.60}}, {{0.62, 0.36}, {0.62, 0.88}}};
        a[5] = {{{0.70, 0.12},
                 {0.32, 0.12},
                 {0.30, 0.45},
                 {0.45, 0.40},
                 {0.60, 0.42},
                 {0.70, 0.52},
                 {0.72, 0.68},
                 {0.62, 0.82},
                 {0.44, 0.88},
                 {0.28, 0.80}}};
        a[6] = {{{0.64, 0.14},
                 {0.48, 0.12},
                 {0.36, 0.24},
                 {0.30, 0.44},
                 {0.30, 0.66},
                 {0.38, 0.82},
                 {0.54, 0.88},
                 {0.66, 0.80},
                 {0.70, 0.66},
                 {0.62, 0.54},
                 {0.46, 0.52},
                 {0.34, 0.60}}};
        a[7] = {{{0.26, 0.12}, {0.74, 0.12}, {0.52, 0.50}, {0.42, 0.88}}, {{0.36, 0.50}, {0.64, 0.50}}};
        a[8] = ellipse(0.50, 0.30, 0.20, 0.18);
        for (auto& p : ellipse(0.50, 0.66, 0.24, 0.22)) a[8].push_back(p);
        a[9] = ellipse(0.52, 0.32, 0.20, 0.20);
        a[9].push_back({{0.72, 0.32}, {0.70, 0.60}, {0.60, 0.88}});
        return a;
    }();
    return g;
}

double dist_to_segment(const Pt& p, const Pt& a, const Pt& b) {
    const double vx = b.x - a.x;
    const double vy = b.y - a.y;
    const double wx = p.x - a.x;
    const double wy = p.y - a.y;
    const double len_sq = vx * vx + vy * vy;
    double t = len_sq > 0.0 ? (wx * vx + wy * vy) / len_sq : 0.0;
    t = std::min(1.0, std::max(0.0, t));
    const double dx = wx - t * vx;
    const double dy = wy - t * vy;
    return std::sqrt(dx * dx + dy * dy);
}

double dist_to_glyph(const Pt& p, const std::vector<Polyline>& polys) {
    double best = 1e9;
    for (const Polyline& poly : polys) {
        for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
            best = std::min(best, dist_to_segment(p, poly[i], poly[i + 1]));
        }
    }
    return best;
}

}  // namespace

void render_digit(int digit, float* out, double dx, double dy, double rotate, double scale, double thickness,
                  double ink) {
    if (digit < 0 || digit > 9) throw IndexError("render_digit: digit out of range");
    const std::vector<Polyline>& glyph = glyphs()[static_cast<std::size_t>(digit)];

    const double box = 20.0 * scale;  // glyph box in pixels, MNIST-style 20x20 core
    const double cos_r = std::cos(-rotate);
    const double sin_r = std::sin(-rotate);
    const double cx = 14.0 + dx;
    const double cy = 14.0 + dy;
    const double half_width = thickness / box;  // in glyph units
    const double aa = 0.6 / box;                // anti-alias band

    for (int py = 0; py < 28; ++py) {
        for (int px = 0; px < 28; ++px) {
            const double wx = (static_cast<double>(px) + 0.5 - cx);
            const double wy = (static_cast<double>(py) + 0.5 - cy);
            const Pt g = {(cos_r * wx - sin_r * wy) / box + 0.5, (sin_r * wx + cos_r * wy) / box + 0.5};
            double v = 0.0;
            if (g.x > -0.2 && g.x < 1.2 && g.y > -0.2 && g.y < 1.2) {
                const double d = dist_to_glyph(g, glyph);
                v = ink * std::min(1.0, std::max(0.0, (half_width + aa - d) / (2.0 * aa)));
            }
            out[py * 28 + px] = static_cast<float>(v);
        }
    }
}

SynthDigits make_synth_digits(int n, std::uint64_t seed, const SynthDigitsConfig& cfg) {
    if (n < 1) throw ConfigError("make_synth_digits: n must be positive");
    SynthDigits out;
    out.images = Tensor({n, 784});
    out.labels.values.reserve(static_cast<std::size_t>(n));

    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        const int digit = rng.uniform_int(10);
        out.labels.values.push_back(digit);
        const double dx = rng.uniform(-static_cast<double>(cfg.max_shift), static_cast<double>(cfg.max_shift));
        const double dy = rng.uniform(-static_cast<double>(cfg.max_shift), static_cast<double>(cfg.max_shift));
        const double rot = rng.uniform(-cfg.max_rotate, cfg.max_rotate);
        const double scale = rng.uniform(cfg.min_scale, cfg.max_scale);
        const double thick = rng.uniform(cfg.min_thickness, cfg.max_thickness);
        const double ink = rng.uniform(cfg.min_ink, 1.0);
        render_digit(digit, out.images.row(i), dx, dy, rot, scale, thick, ink);
        if (cfg.noise_sigma > 0.0) {
            float* row = out.images.row(i);
            for (int j = 0; j < 784; ++j) {
                const double v = static_cast<double>(row[j]) + cfg.noise_sigma * rng.normal();
                row[j] = static_cast<float>(std::min(1.0, std::max(0.0, v)));
            }
        }
    }
    return out;
}

}  // namespace actclust
