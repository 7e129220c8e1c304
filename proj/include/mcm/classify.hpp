#pragma once

// Escape Trichotomy classification and parameter-plane surveys.
//
// Membership in the basin B of infinity is certified by walking a sampled path with
// Koebe disks: a point y of B carries the disk D(y, r) with
//   r = (1 - exp(-2 (G(y) - g))) / (4 |grad G(y)|),
// contained in the univalence domain {G > g} of the Boettcher map. Starting from a point
// with |y| > R, every step that stays inside the current disk stays inside B. Trap-door
// membership uses the same disks pulled back by one application of f.

#include "dynamics.hpp"
#include "parallel.hpp"

#include <string>
#include <vector>

namespace mcm {

enum class EscapeTag { CantorSet, CantorCircles, Sierpinski, Connected, Indeterminate };

inline const char* tag_name(EscapeTag t) {
    switch (t) {
        case EscapeTag::CantorSet: return "CantorSet";
        case EscapeTag::CantorCircles: return "CantorCircles";
        case EscapeTag::Sierpinski: return "Sierpinski";
        case EscapeTag::Connected: return "Connected";
        default: return "Indeterminate";
    }
}

struct EscapeClass {
    EscapeTag tag = EscapeTag::Indeterminate;
    std::optional<int> first_escape_iterate;
    std::string certificate;
};

struct CertifyOptions {
    int samples = 256;       ///< samples per straight path
    int max_steps = 20000;   ///< certified sub-steps per path
    int ascent_steps = 4000; ///< steps of the gradient path generator
    double g_floor = 0;      ///< univalence level g of the Boettcher map
    int budget = 512;
};

/// Radius of a disk around y inside the basin of infinity, 0 when not available.
inline double basin_disk(const ParamContext& c, cplx y, const CertifyOptions& o) {
    if (std::abs(y) > c.escape_radius) {
        // {|z| > R} lies in B and is contained in the univalence domain whenever g_floor is
        // below log R - log 2; use the larger of the two available radii.
        auto g = green_full(c, y, o.budget);
        double koebe = 0;
        if (g.status == EscapeStatus::Escaping && g.G > o.g_floor && std::abs(g.dlogphi) > 0)
            koebe = (1 - std::exp(-2 * (g.G - o.g_floor))) / (4 * std::abs(g.dlogphi));
        return std::max(koebe, std::abs(y) - c.escape_radius);
    }
    auto g = green_full(c, y, o.budget);
    if (g.status != EscapeStatus::Escaping || !(g.G > o.g_floor) || !std::isfinite(g.G)) return 0;
    double q = std::abs(g.dlogphi);
    if (q == 0) return 0;
    return (1 - std::exp(-2 * (g.G - o.g_floor))) / (4 * q);
}

/// Radius of a disk around y inside the component of f^{-1}(B) containing y.
inline double trap_disk(const ParamContext& c, cplx y, const CertifyOptions& o) {
    if (y == cplx(0, 0)) return c.trap_radius();
    cplx w = f_eval(c, y);
    double r = basin_disk(c, w, o);
    r = std::min({r, std::abs(w - c.vplus), std::abs(w - c.vminus)});
    double d = std::abs(f_deriv(c, y));
    if (!(d > 0) || !std::isfinite(d)) return 0;
    return r / (4 * d);
}

enum class DiskMode { Basin, Trap };

inline double disk_radius(const ParamContext& c, cplx y, DiskMode m, const CertifyOptions& o) {
    return m == DiskMode::Basin ? basin_disk(c, y, o) : trap_disk(c, y, o);
}

/// Walks from path.back() (an anchor known to be inside the component) to path.front(),
/// stepping only inside certified disks. Returns the number of steps, or -1 on failure.
inline int certified_walk(const ParamContext& c, const std::vector<cplx>& path, DiskMode mode, const CertifyOptions& o) {
    if (path.empty()) return -1;
    cplx x = path.back();
    double r = disk_radius(c, x, mode, o);
    int steps = 0;
    for (std::size_t i = path.size() - 1; i-- > 0;) {
        cplx target = path[i];
        while (true) {
            if (!(r > 0)) return -1;
            double d = std::abs(target - x);
            if (d < r) {
                x = target;
                r = disk_radius(c, x, mode, o);
                break;
            }
            x += (target - x) * (0.9 * r / d);
            r = disk_radius(c, x, mode, o);
            if (++steps > o.max_steps) return -1;
        }
        ++steps;
    }
    return steps;
}

struct AscentPath {
    std::vector<cplx> points;
    enum End { Outside, TrapDisk, Failed } end = Failed;
};

/// Path of steepest ascent of G from z, ending outside |z| = R or inside the trap disk.
inline AscentPath ascent_path(const ParamContext& c, cplx z, const CertifyOptions& o) {
    AscentPath p;
    const double R = c.escape_radius, r0 = c.trap_radius();
    CertifyOptions flat = o;
    flat.g_floor = 0;
    cplx y = z;
    for (int i = 0; i < o.ascent_steps; ++i) {
        p.points.push_back(y);
        if (std::abs(y) > R) { p.end = AscentPath::Outside; return p; }
        if (std::abs(y) <= r0) { p.end = AscentPath::TrapDisk; return p; }
        auto g = green_full(c, y, o.budget);
        if (g.status != EscapeStatus::Escaping || !std::isfinite(g.G)) return p;
        double q = std::abs(g.dlogphi);
        if (q == 0) return p;
        double r = (1 - std::exp(-2 * g.G)) / (4 * q);
        cplx dir = std::conj(g.dlogphi) / q;
        y += dir * (0.5 * r);
    }
    return p;
}

inline std::vector<cplx> segment_samples(cplx a, cplx b, int samples) {
    std::vector<cplx> v;
    samples = std::max(samples, 2);
    for (int i = 0; i < samples; ++i) v.push_back(a + (b - a) * (double(i) / (samples - 1)));
    return v;
}

struct Certificate {
    bool ok = false;
    std::string how;
};

inline Certificate certify_in_basin(const ParamContext& c, cplx z, const CertifyOptions& o = {}) {
    const double R = c.escape_radius;
    if (std::abs(z) > R) return {true, "outside escape radius"};
    if (z == cplx(0, 0)) return {false, "origin"};
    auto radial = segment_samples(z, z * (1.01 * R / std::abs(z)), o.samples);
    int s = certified_walk(c, radial, DiskMode::Basin, o);
    if (s >= 0) return {true, "radial path, " + std::to_string(o.samples) + " samples, " + std::to_string(s) + " certified steps"};
    auto asc = ascent_path(c, z, o);
    if (asc.end == AscentPath::Outside) {
        s = certified_walk(c, asc.points, DiskMode::Basin, o);
        if (s >= 0) return {true, "gradient path, " + std::to_string(asc.points.size()) + " samples, " + std::to_string(s) + " certified steps"};
    }
    return {false, "no certified path to |z| = R"};
}

inline Certificate certify_in_trap(const ParamContext& c, cplx z, const CertifyOptions& o = {}) {
    const double r0 = c.trap_radius();
    if (std::abs(z) <= r0) return {true, "inside trap disk"};
    auto radial = segment_samples(z, z * (0.99 * r0 / std::abs(z)), o.samples);
    int s = certified_walk(c, radial, DiskMode::Trap, o);
    if (s >= 0) return {true, "radial path to 0, " + std::to_string(o.samples) + " samples, " + std::to_string(s) + " certified steps"};
    auto asc = ascent_path(c, z, o);
    if (asc.end == AscentPath::TrapDisk) {
        s = certified_walk(c, asc.points, DiskMode::Trap, o);
        if (s >= 0) return {true, "gradient path to 0, " + std::to_string(asc.points.size()) + " samples, " + std::to_string(s) + " certified steps"};
    }
    return {false, "no certified path to 0"};
}

inline EscapeClass classify_escape(const ParamContext& c, int budget = 256, int samples = 256) {
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
    EscapeClass out;
    int ke = escape_time(c, c.vplus, budget);
    if (ke < 0) {
        out.tag = EscapeTag::Connected;
        out.certificate = "critical orbit bounded for " + std::to_string(budget) + " iterates";
        return out;
    }
    CertifyOptions o;
    o.samples = samples;
    auto gv = green_full(c, c.vplus, 4 * budget);
    o.g_floor = gv.status == EscapeStatus::Escaping && std::isfinite(gv.G) ? gv.G / c.n : 0;
    if (auto cert = certify_in_basin(c, c.vplus, o); cert.ok) {
        out.tag = EscapeTag::CantorSet;
        out.certificate = "v+ in B: " + cert.how;
        return out;
    }
    if (auto cert = certify_in_trap(c, c.vplus, o); cert.ok) {
        out.tag = EscapeTag::CantorCircles;
        out.first_escape_iterate = 0;
        out.certificate = "v+ in T: " + cert.how;
        return out;
    }
    cplx z = c.vplus;
    for (int k = 1; k <= ke; ++k) {
        z = f_eval(c, z);
        if (auto cert = certify_in_trap(c, z, o); cert.ok) {
            out.tag = EscapeTag::Sierpinski;
            out.first_escape_iterate = k;
            out.certificate = "f^" + std::to_string(k) + "(v+) in T: " + cert.how;
            return out;
        }
    }
    out.tag = EscapeTag::Indeterminate;
    out.certificate = "critical value escapes at iterate " + std::to_string(ke) + " but no path certificate found";
    return out;
}

struct Window {
    double x0 = -1, x1 = 1, y0 = -1, y1 = 1;

    /// Pixel centers placed symmetrically: coordinate = mid + (i - (N-1)/2) * step, which mirrors
    /// exactly about the window center.
    double x(int i, int w) const { return 0.5 * (x0 + x1) + (i - 0.5 * (w - 1)) * ((x1 - x0) / w); }
    double y(int j, int h) const { return 0.5 * (y0 + y1) - (j - 0.5 * (h - 1)) * ((y1 - y0) / h); }
    cplx at(int i, int j, int w, int h) const { return {x(i, w), y(j, h)}; }
};

struct SurveyResult {
    int width = 0, height = 0, n = 3;
    Window window;
    std::vector<EscapeTag> tags;  ///< row-major, row 0 at the top
    std::vector<int> first_escape;
    long conjugation_mismatches = -1;  ///< -1 when the window is not symmetric about R
    long rotation_mismatches = -1;     ///< mismatches of class(nu lambda) vs class(lambda), if computed

    EscapeTag at(int i, int j) const { return tags[std::size_t(j) * width + i]; }
};

inline SurveyResult survey_parameter_plane(int n, const Window& win, int width, int height, int budget = 256,
                                           int jobs = 1, bool rotation_check = false, int samples = 256) {
    if (width < 1 || height < 1) throw std::invalid_argument("resolution must be >= 1x1");
    SurveyResult s;
    s.width = width;
    s.height = height;
    s.n = n;
    s.window = win;
    s.tags.assign(std::size_t(width) * height, EscapeTag::Indeterminate);
    s.first_escape.assign(s.tags.size(), -1);
    std::vector<EscapeTag> rot(rotation_check ? s.tags.size() : 0);
    const cplx nu = std::polar(1.0, 2 * kPi / (n - 1));
    parallel_for(s.tags.size(), jobs, [&](std::size_t idx) {
        int i = int(idx % width), j = int(idx / width);
        cplx lam = win.at(i, j, width, height);
        if (lam == cplx(0, 0)) return;
        auto e = classify_escape(ParamContext::make(lam, n), budget, samples);
        s.tags[idx] = e.tag;
        s.first_escape[idx] = e.first_escape_iterate.value_or(-1);
        if (rotation_check) rot[idx] = classify_escape(ParamContext::make(nu * lam, n), budget, samples).tag;
    });
    if (win.y0 == -win.y1) {
        s.conjugation_mismatches = 0;
        for (int j = 0; j < height; ++j)
            for (int i = 0; i < width; ++i)
                if (s.at(i, j) != s.at(i, height - 1 - j)) ++s.conjugation_mismatches;
    }
    if (rotation_check) {
        s.rotation_mismatches = 0;
        for (std::size_t k = 0; k < rot.size(); ++k)
            if (rot[k] != s.tags[k]) ++s.rotation_mismatches;
    }
    return s;
}

}  // namespace mcm
