#pragma once

// Yoccoz puzzles built from cut rays, tableaux, renormalization detection, admissible
// graphs and boundary regularity.
//
// Pixels are coded symbolically. For a cut ray Omega^beta with itinerary s, the side of a
// point z is decided on the first iterate f^k(z) that leaves the union S_{s_k} u S_{-s_k}:
// the remaining 2n-2 sectors split into two fans of n-1 sectors, one on each side. When
// f^k(z) stays inside the union, the side is inherited from f^{k+1}(z), flipped according to
// whether f^k(z) sits in S_{s_k} or S_{-s_k}. Iterates beyond the escape radius use the
// Boettcher angle instead.

#include "classify.hpp"
#include "rays.hpp"

#include <array>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>

namespace mcm {

// ---------------------------------------------------------------------------------------------
// Graph

struct PuzzleGraph {
    std::vector<Angle> angles;       ///< generators
    std::vector<Angle> rays;         ///< one angle per cut ray in the union of the tau-cycles
    std::vector<std::vector<double>> ray_orbit;  ///< tau^j of each ray angle, one cycle, as doubles
    std::vector<std::vector<int>> ray_pos;       ///< sector positions of the symbols along the cycle
    int m = 24;                      ///< symbolic depth cap for side decisions
    double level = 1;                ///< equipotential G = level bounds X
    std::vector<cplx> equipotential;
    std::vector<TouchReport> touch;  ///< one per generator
    bool touchable = false;
};

inline PuzzleGraph build_graph(const ParamContext& c, const std::vector<Angle>& angles, int m = 24,
                               const std::vector<cplx>* orbit_override = nullptr) {
    if (m < 1 || m > 60) throw std::invalid_argument("build_graph: cut-ray depth must lie in [1, 60]");
    if (!c.in_H) throw domain_error("build_graph: lambda must lie in H");
    PuzzleGraph g;
    g.angles = angles;
    g.m = m;
    g.level = c.green_level_v;
    if (std::log(c.escape_radius) + 0.05 >= g.level)
        throw domain_error("build_graph: equipotential level must exceed log R");
    std::set<Angle> cycles_seen;
    for (const auto& t : angles) {
        auto cls = angle_itinerary(t, c.n);
        if (!cls.itinerary.pre.empty() || cls.itinerary.per.empty())
            throw std::invalid_argument("build_graph: " + t.str() + " is not periodic under tau");
        if (!cls.in_theta) throw std::invalid_argument("build_graph: " + t.str() + " is not in Theta");
        auto orb = angle_orbit(t, c.n);
        for (const auto& a : orb.angles)
            if (cycles_seen.count(a)) throw std::invalid_argument("build_graph: angles share a cycle");
        for (const auto& a : orb.angles) {
            cycles_seen.insert(a);
            Angle other = a.shifted(1, 2);
            if (std::find(g.rays.begin(), g.rays.end(), other) != g.rays.end()) continue;
            if (std::find(g.rays.begin(), g.rays.end(), a) != g.rays.end()) continue;
            g.rays.push_back(a);
        }
        g.touch.push_back(touchability(c, {t}, 24, 64, 1e-6, orbit_override));
        if (g.touch.back().touchable) g.touchable = true;
    }
    for (const auto& a : g.rays) {
        auto orb = angle_orbit(a, c.n);
        std::vector<double> od;
        std::vector<int> op;
        for (const auto& x : orb.angles) {
            od.push_back(x.to_double());
            op.push_back(position_of_symbol(sector_of_angle(x, c.n), c.n));
        }
        g.ray_orbit.push_back(od);
        g.ray_pos.push_back(op);
    }
    const int samples = 512;
    cplx z = std::polar(std::exp(g.level), 0.0);
    for (int i = 0; i < samples; ++i) {
        double t = double(i) / samples;
        z = bottcher_solve(c, g.level, t, std::polar(std::abs(z), 2 * kPi * t));
        g.equipotential.push_back(z);
    }
    return g;
}

// ---------------------------------------------------------------------------------------------
// Pixel orbits and piece labels

constexpr int kEscaped = -1;
constexpr int kOnGraph = -2;

struct PuzzleGrid {
    int depth = 0;
    Window window;
    int width = 0, height = 0;
    std::vector<int> labels;  ///< piece id, kEscaped or kOnGraph
    int count = 0;
    std::vector<long> sizes;
    int small_pieces = 0;     ///< pieces with fewer than 4 pixels
    std::string warning;

    int at(int i, int j) const { return labels[std::size_t(j) * width + i]; }
};

/// Forward orbits of all pixels of a window, kept for repeated labeling at several depths.
class PuzzleRaster {
public:
    PuzzleRaster(const ParamContext& c, PuzzleGraph g, const Window& win, int w, int h, int max_depth, int jobs = 1)
        : c_(c), g_(std::move(g)), win_(win), w_(w), h_(h), max_depth_(max_depth) {
        if (w < 4 || h < 4) throw std::invalid_argument("PuzzleRaster: resolution too small");
        if (max_depth < 0) throw std::invalid_argument("PuzzleRaster: depth must be >= 0");
        L_ = max_depth + g_.m + 1;
        const std::size_t N = std::size_t(w) * h;
        pos_.assign(N * L_, 0);
        esc_.assign(N, -1);
        t_esc_.assign(N, 0);
        g_esc_.assign(N, 0);
        parallel_for(std::size_t(h), resolve_jobs(jobs), [&](std::size_t j) {
            for (int i = 0; i < w_; ++i) fill(std::size_t(j) * w_ + i, win_.at(i, int(j), w_, h_));
        });
    }

    const ParamContext& context() const { return c_; }
    const PuzzleGraph& graph() const { return g_; }
    const Window& window() const { return win_; }
    int width() const { return w_; }
    int height() const { return h_; }
    int max_depth() const { return max_depth_; }

    /// Side of pixel px at depth d relative to ray r: +1, -1, or 0 (on the ray or undecided).
    int side(std::size_t px, int d, std::size_t r) const {
        const int n = c_.n, n2 = 2 * n;
        const int e = esc_[px];
        if (e == -2) return 0;
        const auto& orb = g_.ray_orbit[r];
        const auto& rp = g_.ray_pos[r];
        const std::size_t per = orb.size();
        struct Frame { int P, p, E; };
        std::array<Frame, 64> stack;
        int top = 0, base = 0;
        for (int j = 0;; ++j) {
            int k = d + j;
            if (e >= 0 && k >= e) {
                double t = t_esc_[px];
                for (int q = e; q < k; ++q) t = frac(t * n);
                double diff = frac(t - orb[j % per]);
                if (diff < 1e-10 || diff > 1 - 1e-10 || std::abs(diff - 0.5) < 1e-10) return 0;
                base = diff < 0.5 ? 1 : -1;
                break;
            }
            if (j >= g_.m || k >= L_) return 0;
            int P = pos_[px * L_ + k];
            int p = rp[j % per];
            int dp = ((P - p) % n2 + n2) % n2;
            if (dp % n != 0) {
                base = dp < n ? 1 : -1;
                break;
            }
            int pn = rp[(j + 1) % per];
            int cv = P % 2 == 0 ? 0 : n;
            int de = ((cv - pn) % n2 + n2) % n2;
            stack[top++] = {P, p, de < n ? 1 : -1};
        }
        int s = base;
        while (top > 0) {
            const Frame& f = stack[--top];
            bool own = f.P == f.p;
            s = (s == f.E) ? (own ? -1 : 1) : (own ? 1 : -1);
        }
        return s;
    }

    bool escaped(std::size_t px, int d) const {
        int e = esc_[px];
        if (e < 0 || d < e) return false;
        return g_esc_[px] * std::pow(double(c_.n), d - e) >= g_.level;
    }

    /// Code of pixel px at depth d: -1 escaped, -2 on the graph, else the side bit pattern.
    long long code(std::size_t px, int d) const {
        if (escaped(px, d)) return -1;
        if (esc_[px] == -2) return -2;
        long long bits = 0;
        for (std::size_t r = 0; r < g_.rays.size(); ++r) {
            int s = side(px, d, r);
            if (s == 0) return -2;
            if (s > 0) bits |= 1LL << r;
        }
        return bits;
    }

    const PuzzleGrid& labels(int d) const {
        if (d < 0 || d > max_depth_) throw std::out_of_range("PuzzleRaster: depth outside the computed range");
        auto it = cache_.find(d);
        if (it != cache_.end()) return it->second;
        const std::size_t N = std::size_t(w_) * h_;
        std::vector<long long> key(N);
        for (std::size_t k = 0; k < N; ++k) key[k] = code(k, d);
        // pieces meet at preimages of 0 and infinity; a pixel next to a different code joins the
        // graph so that same-coded pieces cannot leak through a junction
        std::vector<long long> k2(key);
        for (int j = 0; j < h_; ++j)
            for (int i = 0; i < w_; ++i) {
                std::size_t k = std::size_t(j) * w_ + i;
                if (key[k] < 0) continue;
                const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
                for (auto& o : nb) {
                    int a = i + o[0], b = j + o[1];
                    if (a < 0 || b < 0 || a >= w_ || b >= h_) continue;
                    long long other = key[std::size_t(b) * w_ + a];
                    if (other >= 0 && other != key[k]) { k2[k] = -2; break; }
                }
            }
        for (std::size_t k = 0; k < N; ++k)
            if (key[k] < 0) k2[k] = key[k];
        key = k2;
        for (auto& x : k2) if (x < 0) x = -1;
        PuzzleGrid pg;
        pg.depth = d;
        pg.window = win_;
        pg.width = w_;
        pg.height = h_;
        pg.count = label_components(k2, w_, h_, pg.labels, false);
        for (std::size_t k = 0; k < N; ++k)
            if (key[k] == -1) pg.labels[k] = kEscaped;
            else if (key[k] == -2) pg.labels[k] = kOnGraph;
        pg.sizes.assign(pg.count, 0);
        for (int l : pg.labels) if (l >= 0) ++pg.sizes[l];
        for (long s : pg.sizes) if (s < 4) ++pg.small_pieces;
        if (pg.small_pieces)
            pg.warning = std::to_string(pg.small_pieces) + " pieces with fewer than 4 pixels at depth " + std::to_string(d);
        return cache_.emplace(d, std::move(pg)).first->second;
    }

    /// Pixel index containing z, or -1 outside the window.
    long pixel_of(cplx z) const {
        double fx = (z.real() - win_.x0) / (win_.x1 - win_.x0) * w_;
        double fy = (win_.y1 - z.imag()) / (win_.y1 - win_.y0) * h_;
        if (!(fx >= 0 && fx < w_ && fy >= 0 && fy < h_)) return -1;
        return long(int(fy)) * w_ + int(fx);
    }

    /// Piece label of z at depth d (kEscaped or kOnGraph allowed); std::nullopt when another
    /// piece lies within one pixel (a hole) or z is outside the window.
    std::optional<int> piece_of(cplx z, int d) const {
        long px = pixel_of(z);
        if (px < 0) return std::nullopt;
        const auto& pg = labels(d);
        int i = int(px % w_), j = int(px / w_);
        int l = pg.labels[px];
        if (l < 0) return l;
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                int a = i + di, b = j + dj;
                if (a < 0 || b < 0 || a >= w_ || b >= h_) return std::nullopt;
                int o = pg.at(a, b);
                if (o >= 0 && o != l) return std::nullopt;
            }
        return l;
    }

private:
    static double frac(double x) { return x - std::floor(x); }

    void fill(std::size_t px, cplx z) {
        const double R = c_.escape_radius;
        for (int k = 0; k < L_; ++k) {
            if (z == cplx(0, 0) || is_infinite(z) || std::isnan(z.real())) { esc_[px] = -2; return; }
            if (std::abs(z) > R) {
                auto [lp, q] = log_bottcher(c_, z);
                (void)q;
                esc_[px] = k;
                g_esc_[px] = lp.real();
                double t = lp.imag() / (2 * kPi);
                t_esc_[px] = t - std::floor(t);
                return;
            }
            pos_[px * L_ + k] = std::uint8_t(sector_of_point(c_, z).position);
            z = f_eval(c_, z);
        }
    }

    ParamContext c_;
    PuzzleGraph g_;
    Window win_;
    int w_, h_, max_depth_, L_ = 0;
    std::vector<std::uint8_t> pos_;
    std::vector<int> esc_;  ///< first k with |f^k z| > R, -1 if none within the horizon, -2 grand orbit of 0
    std::vector<double> t_esc_, g_esc_;
    mutable std::map<int, PuzzleGrid> cache_;
};

inline PuzzleGrid label_pieces(const ParamContext& c, const PuzzleGraph& g, int d, const Window& win, int w, int h,
                               int jobs = 1) {
    PuzzleRaster r(c, g, win, w, h, d, jobs);
    return r.labels(d);
}

/// Fraction of pixels at depth d+1 whose piece is not contained in a single depth-d piece,
/// ignoring pixels within `margin` of a depth-d piece boundary.
inline double refinement_violation(const PuzzleRaster& r, int d, int margin = 2) {
    const auto& a = r.labels(d);
    const auto& b = r.labels(d + 1);
    const int w = r.width(), h = r.height();
    std::map<int, std::map<int, long>> votes;
    auto interior = [&](int i, int j) {
        int l = a.at(i, j);
        for (int dj = -margin; dj <= margin; ++dj)
            for (int di = -margin; di <= margin; ++di) {
                int x = i + di, y = j + dj;
                if (x < 0 || y < 0 || x >= w || y >= h || a.at(x, y) != l) return false;
            }
        return true;
    };
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i)
            if (b.at(i, j) >= 0 && a.at(i, j) >= 0 && interior(i, j)) ++votes[b.at(i, j)][a.at(i, j)];
    long total = 0, bad = 0;
    for (auto& [child, parents] : votes) {
        long best = 0, sum = 0;
        for (auto& [p, cnt] : parents) { best = std::max(best, cnt); sum += cnt; }
        total += sum;
        bad += sum - best;
    }
    // pixels escaping at depth d must stay escaped at depth d+1
    for (std::size_t k = 0; k < a.labels.size(); ++k)
        if (a.labels[k] == kEscaped && b.labels[k] >= 0) { ++bad; ++total; }
    return total ? double(bad) / total : 0.0;
}

struct RotationCheck {
    long samples = 0;
    long agree = 0;
    bool bijective = false;
    std::map<int, int> permutation;
};

/// Depth-d labels under z -> omega z, omega = e^{i pi / n}: the majority map between labels
/// must be a bijection on the pieces met by the sample disk.
inline RotationCheck rotation_permutation(const PuzzleRaster& r, int d, double radius) {
    RotationCheck rc;
    const auto& pg = r.labels(d);
    const cplx omega = std::polar(1.0, kPi / r.context().n);
    std::map<int, std::map<int, long>> votes;
    const Window& win = r.window();
    for (int j = 0; j < r.height(); ++j)
        for (int i = 0; i < r.width(); ++i) {
            cplx z = win.at(i, j, r.width(), r.height());
            if (std::abs(z) > radius) continue;
            auto a = r.piece_of(z, d), b = r.piece_of(omega * z, d);
            if (!a || !b || *a < 0 || *b < 0) continue;
            ++votes[*a][*b];
            ++rc.samples;
        }
    std::set<int> images;
    for (auto& [src, tgt] : votes) {
        int best = -1;
        long cnt = 0;
        for (auto& [t, k] : tgt) if (k > cnt) { cnt = k; best = t; }
        rc.permutation[src] = best;
        rc.agree += cnt;
        images.insert(best);
    }
    rc.bijective = !votes.empty() && images.size() == votes.size();
    return rc;
}

// ---------------------------------------------------------------------------------------------
// Tableau

enum class TableauClass { NonCritical, Periodic, PrePeriodic, Aperiodic };

inline const char* tableau_class_name(TableauClass t) {
    switch (t) {
        case TableauClass::NonCritical: return "non-critical";
        case TableauClass::Periodic: return "critical periodic";
        case TableauClass::PrePeriodic: return "critical pre-periodic";
        default: return "critical aperiodic-so-far";
    }
}

constexpr int kOff = -1;
constexpr int kHole = -2;
constexpr int kOut = -3;  ///< f^l(c) escaped from X at depth d

struct Tableau {
    int critical = 0;  ///< index k of c_k
    int max_depth = 0, max_cols = 0;
    std::vector<std::vector<int>> flag;  ///< [d][l]: index of c' with P_d(f^l c) = P_d(c'), or kOff/kHole/kOut
    TableauClass cls = TableauClass::Aperiodic;
    int period = 0;
    int preperiod = 0;
    int noncritical_depth = -1;
    bool t1_ok = true;
    long t2_checks = 0, t2_violations = 0;
    std::map<int, std::vector<int>> children;  ///< row d -> child rows d + l
    std::vector<bool> excellent;               ///< per row

    int at(int d, int l) const { return flag[d][l]; }
    bool critical_at(int d, int l) const { return flag[d][l] >= 0; }
};

/// Orbit of a point, clamped once it leaves any window of interest.
inline std::vector<cplx> orbit_points(const ParamContext& c, cplx z, int len) {
    std::vector<cplx> out;
    for (int i = 0; i < len; ++i) {
        out.push_back(z);
        if (std::abs(z) > 1e100 || z == cplx(0, 0)) {
            for (int j = i + 1; j < len; ++j) out.push_back(z);
            break;
        }
        z = f_eval(c, z);
    }
    return out;
}

inline Tableau build_tableau(const PuzzleRaster& r, int critical, int max_cols = 96, int t2_samples = 400) {
    const auto& c = r.context();
    if (r.graph().touchable) throw touchable_ray("build_tableau: graph is touchable");
    if (critical < 0 || critical >= 2 * c.n) throw std::invalid_argument("build_tableau: bad critical index");
    const int D = r.max_depth();
    Tableau t;
    t.critical = critical;
    t.max_depth = D;
    t.max_cols = max_cols;
    const int N2 = 2 * c.n;
    auto orbit = orbit_points(c, c.critical_points[critical], max_cols + D + 2);
    std::vector<std::vector<cplx>> corb(N2);
    for (int k = 0; k < N2; ++k) corb[k] = orbit_points(c, c.critical_points[k], D + 2);

    // piece ids of the critical points and of the orbit at every depth
    std::vector<std::vector<int>> crit_piece(D + 1, std::vector<int>(N2, kHole));
    std::vector<std::vector<int>> orb_piece(D + 1, std::vector<int>(max_cols + D + 2, kHole));
    auto id = [&](cplx z, int d) {
        long px = r.pixel_of(z);
        if (px < 0) return std::abs(z) > c.escape_radius ? kOut : kHole;
        auto p = r.piece_of(z, d);
        if (!p || *p == kOnGraph) return kHole;
        return *p == kEscaped ? kOut : *p;
    };
    for (int d = 0; d <= D; ++d) {
        for (int k = 0; k < N2; ++k) crit_piece[d][k] = id(c.critical_points[k], d);
        for (std::size_t l = 0; l < orb_piece[d].size(); ++l) orb_piece[d][l] = id(orbit[l], d);
    }
    t.flag.assign(D + 1, std::vector<int>(max_cols + 1, kOff));
    for (int d = 0; d <= D; ++d)
        for (int l = 0; l <= max_cols; ++l) {
            int p = orb_piece[d][l];
            if (p == kOut || p == kHole) { t.flag[d][l] = p; continue; }
            for (int k = 0; k < N2; ++k)
                if (crit_piece[d][k] == p) { t.flag[d][l] = k; break; }
        }

    // T1: each column's critical depths form an initial segment
    for (int l = 0; l <= max_cols; ++l) {
        bool off_seen = false;
        for (int d = 0; d <= D; ++d) {
            int f = t.flag[d][l];
            if (f == kHole || f == kOut) continue;
            if (f >= 0 && off_seen) t.t1_ok = false;
            if (f == kOff) off_seen = true;
        }
    }

    // T2 spot checks with a deterministic sampler
    std::mt19937 rng(12345u + critical);
    std::vector<std::array<int, 2>> crit_pos;
    for (int d = 0; d <= D; ++d)
        for (int l = 1; l <= max_cols; ++l)
            if (t.flag[d][l] >= 0) crit_pos.push_back({d, l});
    if (!crit_pos.empty()) {
        for (int s = 0; s < t2_samples; ++s) {
            auto [d, l] = crit_pos[rng() % crit_pos.size()];
            int cp = t.flag[d][l];
            int i = int(rng() % (d + 1));
            int j = int(rng() % (d - i + 1));
            if (l + j > max_cols + D) continue;
            int a = id(orbit[l + j], i), b = id(corb[cp][j], i);
            if (a < 0 || b < 0) continue;
            ++t.t2_checks;
            if (a != b) ++t.t2_violations;
        }
    }

    // classification
    for (int d0 = 0; d0 <= D && t.noncritical_depth < 0; ++d0) {
        bool none = true;
        for (int l = 1; l <= max_cols && none; ++l) none = t.flag[d0][l] < 0;
        if (none) t.noncritical_depth = d0;
    }
    bool found = false;
    for (int l = 0; l <= max_cols / 2 && !found; ++l)
        for (int p = 1; l + p <= max_cols / 2 && !found; ++p) {
            bool ok = true;
            for (int d = 0; d <= D && ok; ++d)
                for (int q = l; q + p <= max_cols && ok; ++q) {
                    int a = orb_piece[d][q], b = orb_piece[d][q + p];
                    if (a < 0 || b < 0 || a != b) ok = false;
                }
            if (ok) { found = true; t.preperiod = l; t.period = p; }
        }
    if (t.noncritical_depth >= 0) t.cls = TableauClass::NonCritical;
    else if (found && t.preperiod == 0) t.cls = TableauClass::Periodic;
    else if (found) t.cls = TableauClass::PrePeriodic;
    else t.cls = TableauClass::Aperiodic;

    // children and excellent rows
    t.excellent.assign(D + 1, true);
    for (int d = 0; d < D; ++d)
        for (int l = 0; l <= max_cols; ++l) {
            int f = t.flag[d][l];
            if (f >= 0 && t.flag[d + 1][l] != f) t.excellent[d] = false;
        }
    t.excellent[D] = false;
    for (int d = 0; d < D; ++d)
        for (int l = 1; d + l <= D && l <= max_cols; ++l) {
            int f = t.flag[d][l];
            if (f < 0 || t.flag[d + 1][l] != f) continue;
            bool clean = true;
            for (int i = 1; i < l && clean; ++i) clean = t.flag[d + l - i][i] == kOff;
            if (clean) t.children[d].push_back(d + l);
        }
    return t;
}

inline std::vector<Tableau> build_tableaux(const PuzzleRaster& r, int max_cols = 96, int jobs = 1) {
    const int N2 = 2 * r.context().n;
    for (int d = 0; d <= r.max_depth(); ++d) r.labels(d);  // fill the cache before fanning out
    std::vector<Tableau> out(N2);
    parallel_for(std::size_t(N2), resolve_jobs(jobs), [&](std::size_t k) { out[k] = build_tableau(r, int(k), max_cols); });
    return out;
}

// ---------------------------------------------------------------------------------------------
// Renormalization

struct RenormReport {
    bool renormalizable = false;
    bool conclusive = false;
    int epsilon = 1;
    int period = 0;
    std::vector<int> critical;  ///< flagged critical indices
    int d0 = -1;
    double annulus_px = 0;      ///< thickness of P_{d0} \ P_{d0+p} in pixels
    int orbit_checked = 0;
    bool orbit_consistent = false;
    std::string method;
    std::string note;
};

/// Chessboard distance (pixels) from each pixel of `inner` to the complement of `outer`.
inline double inner_thickness(const std::vector<int>& outer_lab, int outer_id, const std::vector<int>& inner_lab,
                              int inner_id, int w, int h) {
    const std::size_t N = std::size_t(w) * h;
    std::vector<int> dist(N, -1);
    std::deque<std::size_t> q;
    for (std::size_t k = 0; k < N; ++k) {
        int i = int(k % w), j = int(k / w);
        if (outer_lab[k] != outer_id || i == 0 || j == 0 || i == w - 1 || j == h - 1) {
            dist[k] = 0;
            q.push_back(k);
        }
    }
    while (!q.empty()) {
        std::size_t k = q.front();
        q.pop_front();
        int i = int(k % w), j = int(k / w);
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                int a = i + di, b = j + dj;
                if (a < 0 || b < 0 || a >= w || b >= h) continue;
                std::size_t kk = std::size_t(b) * w + a;
                if (dist[kk] < 0) { dist[kk] = dist[k] + 1; q.push_back(kk); }
            }
    }
    int best = -1;
    for (std::size_t k = 0; k < N; ++k)
        if (inner_lab[k] == inner_id) best = best < 0 ? dist[k] : std::min(best, dist[k]);
    return best < 0 ? 0.0 : std::max(0, best - 1);
}

inline RenormReport detect_renormalization(const PuzzleRaster& r, const std::vector<Tableau>& tabs, int horizon = 64) {
    const auto& c = r.context();
    RenormReport rep;
    rep.method = "tableau";
    const int n = c.n;
    std::vector<int> periodic;
    bool any_aperiodic = false;
    for (const auto& t : tabs) {
        if (t.cls == TableauClass::Periodic) periodic.push_back(t.critical);
        if (t.cls == TableauClass::Aperiodic) any_aperiodic = true;
    }
    if (periodic.empty()) {
        rep.conclusive = !any_aperiodic;
        rep.note = any_aperiodic ? "no periodic tableau within the window" : "all tableaux non-critical or pre-periodic";
        return rep;
    }
    const Tableau& T = tabs[periodic.front()];
    const int cp = T.critical;
    int p = T.period;
    if (n % 2 == 1) {
        // two symmetric periodic critical points; *-renormalization when half the period
        // sends c' into the piece of -c'
        int neg = (cp + n) % (2 * n);
        bool star = false;
        if (p % 2 == 0) {
            star = true;
            for (int d = 0; d <= T.max_depth && star; ++d) {
                int f = T.flag[d][p / 2];
                if (f != neg) star = false;
            }
        }
        rep.epsilon = star ? -1 : 1;
        rep.period = star ? p / 2 : p;
        rep.critical = {cp, neg};
    } else {
        int neg = (cp + n) % (2 * n);
        rep.critical = {cp};
        bool star = false;
        if (p % 2 == 0) {
            star = true;
            for (int d = 0; d <= T.max_depth && star; ++d) star = T.flag[d][p / 2] == neg;
        }
        rep.epsilon = star ? -1 : 1;
        rep.period = star ? p / 2 : p;
        if (star) rep.note = "*-renormalizable through -c";
    }
    // witness: smallest d0 with P_{d0+p} compactly inside P_{d0} (positive pixel thickness)
    const int full = T.period;
    for (int d0 = 0; d0 + full <= r.max_depth(); ++d0) {
        // f^p : P_{d0+p}(c') -> P_{d0}(c') has degree 2 only if no intermediate piece is critical
        bool clean = true;
        for (int l = 1; l < full && clean; ++l) clean = T.flag[d0 + full - l][l] == kOff;
        if (!clean) continue;
        auto a = r.piece_of(c.critical_points[cp], d0);
        auto b = r.piece_of(c.critical_points[cp], d0 + full);
        if (!a || !b || *a < 0 || *b < 0) continue;
        double th = inner_thickness(r.labels(d0).labels, *a, r.labels(d0 + full).labels, *b, r.width(), r.height());
        if (th >= 1) {
            rep.d0 = d0;
            rep.annulus_px = th;
            break;
        }
    }
    // orbit consistency: (eps f^p)^k (c') stays in P_{d0+p}(c')
    if (rep.d0 >= 0) {
        int target = *r.piece_of(c.critical_points[cp], rep.d0 + full);
        cplx z = c.critical_points[cp];
        rep.orbit_consistent = true;
        for (int k = 1; k <= horizon; ++k) {
            for (int q = 0; q < rep.period; ++q) z = f_eval(c, z);
            if (rep.epsilon < 0) z = -z;
            long px = r.pixel_of(z);
            if (px < 0 || r.labels(rep.d0 + full).labels[px] != target) { rep.orbit_consistent = false; break; }
            rep.orbit_checked = k;
        }
    }
    rep.renormalizable = rep.d0 >= 0 && rep.orbit_consistent;
    rep.conclusive = true;
    if (rep.d0 < 0) rep.note = "periodic tableau without a compactly contained pair at this resolution";
    return rep;
}

/// Real positive parameters with bounded critical orbit are 1-renormalizable at c0.
inline std::optional<RenormReport> real_renormalization(const ParamContext& c, int budget = 512) {
    if (!(c.lambda.imag() == 0 && c.lambda.real() > 0)) return std::nullopt;
    RenormReport rep;
    rep.method = "real";
    rep.conclusive = true;
    if (escape_time(c, c.vplus, budget) >= 0) {
        rep.note = "critical orbit escapes";
        return rep;
    }
    rep.renormalizable = true;
    rep.epsilon = 1;
    rep.period = 1;
    rep.critical = {0};
    rep.orbit_consistent = true;
    cplx z = c.c0;
    for (int k = 0; k < 64; ++k) {
        z = f_eval(c, z);
        if (z.real() <= 0 || std::abs(z.imag()) > 1e-9 * std::abs(z)) rep.orbit_consistent = false;
    }
    rep.orbit_checked = 64;
    rep.note = "f maps R+ to itself; bounded orbit of c0 under f restricted to R+";
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Admissible graphs

enum class Region3 { D1, D2, D3, D4 };

inline const char* region_name(Region3 r) {
    switch (r) {
        case Region3::D1: return "D1";
        case Region3::D2: return "D2";
        case Region3::D3: return "D3";
        default: return "D4";
    }
}

inline bool point_in_polygon(const std::vector<cplx>& poly, cplx p) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        cplx a = poly[i], b = poly[j];
        if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
            double x = a.real() + (p.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
            if (p.real() < x) in = !in;
        }
    }
    return in;
}

/// For n = 3: whether v lies on the l0-side of omega^{1/12} and on the l1-side of omega^{1/6}.
struct RegionTest {
    Region3 region = Region3::D3;
    bool l0_side_of_1_12 = false;
    bool l1_side_of_1_6 = false;
};

inline RegionTest locate_region3(const ParamContext& c, cplx v, const FullRay& w12, const FullRay& w6) {
    const double far = std::abs(w12.vertices.front());
    auto arc = [&](double a0, double a1, std::vector<cplx>& poly) {
        const int k = 64;
        for (int i = 0; i <= k; ++i) poly.push_back(std::polar(far, a0 + (a1 - a0) * i / k));
    };
    const double l0 = c.arg_c0(), l1 = c.arg_c0() + kPi / 3;
    std::vector<cplx> A(w12.vertices);
    A.push_back(0);
    arc(l0, std::arg(w12.vertices.front()), A);
    std::vector<cplx> B(w6.vertices);
    B.push_back(0);
    arc(l1, std::arg(w6.vertices.front()), B);
    RegionTest t;
    t.l0_side_of_1_12 = point_in_polygon(A, v);
    t.l1_side_of_1_6 = point_in_polygon(B, v);
    if (t.l0_side_of_1_12 && t.l1_side_of_1_6) t.region = Region3::D1;
    else if (t.l0_side_of_1_12) t.region = Region3::D2;
    else if (t.l1_side_of_1_6) t.region = Region3::D4;
    else t.region = Region3::D3;
    return t;
}

struct AdmissibleResult {
    bool found = false;
    std::vector<Angle> graph;                    ///< chosen generators
    std::vector<std::vector<Angle>> candidates;  ///< all graphs admissible per the case analysis
    std::string branch;                          ///< case taken
    std::string region;                          ///< n = 3 only
    int witness_depth = -1;
    double witness_px = 0;                       ///< thickness of A_d(c0) in pixels
    std::string note;
};

struct AdmissibleOptions {
    const cplx* vplus_override = nullptr;              ///< placement of v+ for the region test
    const std::vector<cplx>* orbit_override = nullptr; ///< critical orbit for touchability
    bool witness = true;
    Window window{-3, 3, -3, 3};
    int resolution = 512;
    int max_depth = 4;
    int m = 24;
    int jobs = 1;
};

/// Thickness in pixels of A_d(c0) = P_d(c0) \ P_{d+1}(c0) for the first d in [1, max_depth]
/// where it is positive.
inline std::pair<int, double> annulus_witness(const ParamContext& c, const std::vector<Angle>& graph,
                                              const AdmissibleOptions& o) {
    auto g = build_graph(c, graph, o.m);
    PuzzleRaster r(c, g, o.window, o.resolution, o.resolution, o.max_depth + 1, o.jobs);
    for (int d = 1; d <= o.max_depth; ++d) {
        auto a = r.piece_of(c.c0, d), b = r.piece_of(c.c0, d + 1);
        if (!a || !b || *a < 0 || *b < 0) continue;
        double th = inner_thickness(r.labels(d).labels, *a, r.labels(d + 1).labels, *b, r.width(), r.height());
        if (th >= 1) return {d, th};
    }
    return {-1, 0.0};
}

inline AdmissibleResult admissible_graph_search(const ParamContext& c, const AdmissibleOptions& o = {}) {
    if (!c.in_H) throw domain_error("admissible_graph_search: lambda must lie in H");
    AdmissibleResult res;
    const int n = c.n;
    auto touch = [&](const std::vector<Angle>& a) { return touchability(c, a, 24, 64, 1e-6, o.orbit_override).touchable; };
    if (!o.orbit_override && escape_time(c, c.vplus, 512) >= 0) res.note = "critical orbit escapes";
    if (n == 3) {
        const Angle q(1, 4), h(1, 2);
        bool t4 = touch({q}), t2 = touch({h});
        if (!t4 && !t2) {
            cplx v = o.vplus_override ? *o.vplus_override : c.vplus;
            auto w12 = full_ray_polyline(c, Angle(1, 12));
            auto w6 = full_ray_polyline(c, Angle(1, 6));
            auto rt = locate_region3(c, v, w12, w6);
            res.region = region_name(rt.region);
            switch (rt.region) {
                case Region3::D1: res.candidates = {{q}, {h}, {q, h}}; break;
                case Region3::D2: res.candidates = {{q}}; break;
                case Region3::D4: res.candidates = {{h}}; break;
                default: res.candidates = {{q, h}}; break;
            }
            res.branch = "untouchable: region " + res.region;
        } else if (t2 && !t4) {
            res.candidates = {{q}};
            res.branch = "cut ray of 1/2 touchable: G(1/4)";
        } else if (t4 && !t2) {
            res.candidates = {{h}};
            res.branch = "cut ray of 1/4 touchable: G(1/2)";
        } else {
            res.branch = "both cut rays touchable";
            res.note = "critical orbit meets both cycles; repelling-cycle fallback, no graph returned";
            return res;
        }
    } else if (n == 4) {
        if (!touch({Angle(1, 3)})) {
            res.candidates = {{Angle(1, 3)}};
            res.branch = "G(1/3) untouchable";
        } else if (!touch({Angle(2, 3), Angle(1, 1)})) {
            res.candidates = {{Angle(2, 3), Angle(1, 1)}};
            res.branch = "G(1/3) touchable: G(2/3,1)";
        } else {
            res.branch = "all candidates touchable";
            res.note = "repelling-cycle fallback, no graph returned";
            return res;
        }
    } else {
        for (const auto& a : theta_ad(n, 2))
            if (!touch({a})) res.candidates.push_back({a});
        res.branch = "enumerated period <= 2 angles";
        if (res.candidates.empty()) {
            res.note = "all enumerated angles touchable";
            return res;
        }
    }
    res.found = true;
    res.graph = res.candidates.front();
    if (o.witness) {
        for (const auto& cand : res.candidates) {
            auto [d, th] = annulus_witness(c, cand, o);
            if (d >= 0) {
                res.graph = cand;
                res.witness_depth = d;
                res.witness_px = th;
                break;
            }
        }
        if (res.witness_depth < 0) res.note += (res.note.empty() ? "" : "; ") + std::string("no annulus witness at this resolution");
    }
    return res;
}

// ---------------------------------------------------------------------------------------------
// Boundary of the basin of infinity

struct BoundaryTrace {
    std::vector<cplx> loop;        ///< closed polyline, ordered by argument around 0
    std::vector<double> real_crossings;
    double beta = 0;               ///< positive real boundary point from the certified walk, 0 if none
    double pixel = 0;
    int winding = 0;
};

/// Pixels of B reached from |z| > R by certified Koebe-disk floods, contoured by marching
/// squares; the longest loop is returned.
inline BoundaryTrace boundary_trace(const ParamContext& c, const Window& win, int res, int jobs = 1) {
    auto cls = classify_escape(c);
    if (cls.tag == EscapeTag::CantorSet) throw domain_error("boundary_trace: Julia set is a Cantor set");
    CertifyOptions o;
    const int w = res, h = res;
    const std::size_t N = std::size_t(w) * h;
    const double hx = (win.x1 - win.x0) / w, hy = (win.y1 - win.y0) / h;
    const double step = std::max(hx, hy);
    std::vector<double> rad(N);
    parallel_for(std::size_t(h), resolve_jobs(jobs), [&](std::size_t j) {
        for (int i = 0; i < w; ++i) rad[j * w + i] = basin_disk(c, win.at(i, int(j), w, h), o);
    });
    std::vector<std::uint8_t> in(N, 0);
    std::deque<std::size_t> q;
    for (std::size_t k = 0; k < N; ++k)
        if (std::abs(win.at(int(k % w), int(k / w), w, h)) > c.escape_radius) { in[k] = 1; q.push_back(k); }
    while (!q.empty()) {
        std::size_t k = q.front();
        q.pop_front();
        if (!(rad[k] > step * 1.01)) continue;
        int i = int(k % w), j = int(k / w);
        const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (auto& d : nb) {
            int a = i + d[0], b = j + d[1];
            if (a < 0 || b < 0 || a >= w || b >= h) continue;
            std::size_t kk = std::size_t(b) * w + a;
            if (!in[kk]) { in[kk] = 1; q.push_back(kk); }
        }
    }
    // the complement of B inside the window: contour of the bounded non-B region containing 0
    std::vector<std::uint8_t> mask(N);
    for (std::size_t k = 0; k < N; ++k) mask[k] = in[k] ? 0 : 1;
    auto loops = contour_loops(mask, w, h, win);
    BoundaryTrace bt;
    bt.pixel = step;
    for (auto& l : loops)
        if (l.size() > bt.loop.size()) bt.loop = l;
    if (bt.loop.empty()) throw numeric_failure("boundary_trace: no boundary found in the window");
    // order by argument
    double total = 0;
    for (std::size_t i = 0; i < bt.loop.size(); ++i) {
        cplx a = bt.loop[i], b = bt.loop[(i + 1) % bt.loop.size()];
        total += std::arg(b / a);
    }
    bt.winding = int(std::lround(total / (2 * kPi)));
    if (bt.winding < 0) { std::reverse(bt.loop.begin(), bt.loop.end()); bt.winding = -bt.winding; }
    std::size_t start = 0;
    double best = 1e300;
    for (std::size_t i = 0; i < bt.loop.size(); ++i) {
        double a = arg_0_2pi(bt.loop[i]);
        if (a < best) { best = a; start = i; }
    }
    std::rotate(bt.loop.begin(), bt.loop.begin() + start, bt.loop.end());
    for (std::size_t i = 0; i < bt.loop.size(); ++i) {
        cplx a = bt.loop[i], b = bt.loop[(i + 1) % bt.loop.size()];
        if ((a.imag() > 0) != (b.imag() > 0) || a.imag() == 0) {
            if (a.imag() == b.imag()) { bt.real_crossings.push_back(a.real()); continue; }
            double t = a.imag() / (a.imag() - b.imag());
            bt.real_crossings.push_back(a.real() + t * (b.real() - a.real()));
        }
    }
    std::sort(bt.real_crossings.begin(), bt.real_crossings.end());
    // certified walk along R+ toward the boundary when lambda is real
    if (c.lambda.imag() == 0) {
        double x = c.escape_radius * 1.01;
        for (int k = 0; k < 20000; ++k) {
            double r = basin_disk(c, cplx(x, 0), o);
            if (!(r > 1e-13)) break;
            x -= 0.9 * r;
        }
        bt.beta = x;
    }
    return bt;
}

// ---------------------------------------------------------------------------------------------
// Shape and turning

inline double shape(const std::vector<cplx>& boundary, cplx z) {
    if (boundary.empty()) throw std::invalid_argument("shape: empty boundary");
    double lo = 1e300, hi = 0;
    for (cplx x : boundary) {
        double d = std::abs(x - z);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    if (!(lo > 0)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

/// diam(K) / |z1 - z2| for a sampled arc K from z1 to z2.
inline double turning(const std::vector<cplx>& arc) {
    if (arc.size() < 2) throw std::invalid_argument("turning: arc needs two points");
    double chord = std::abs(arc.front() - arc.back());
    double diam = point_set_diameter(arc.data(), arc.size());
    if (!(chord > 0)) return std::numeric_limits<double>::infinity();
    return std::max(1.0, diam / chord);
}

/// Resamples a closed polyline to `count` points equally spaced in arc length.
inline std::vector<cplx> resample_closed(const std::vector<cplx>& loop, int count) {
    std::vector<double> s{0};
    for (std::size_t i = 0; i < loop.size(); ++i) s.push_back(s.back() + std::abs(loop[(i + 1) % loop.size()] - loop[i]));
    const double total = s.back();
    std::vector<cplx> out;
    std::size_t seg = 0;
    for (int k = 0; k < count; ++k) {
        double target = total * k / count;
        while (seg + 1 < s.size() - 1 && s[seg + 1] < target) ++seg;
        double len = s[seg + 1] - s[seg];
        double t = len > 0 ? (target - s[seg]) / len : 0;
        out.push_back(loop[seg] + t * (loop[(seg + 1) % loop.size()] - loop[seg]));
    }
    return out;
}

struct RegularityDiagnostic {
    double shape = 1;
    double max_turning = 1;
    int samples = 0, pairs = 0;
};

/// Shape about z and the maximum turning over pairs of a 64-point subsample, each pair using
/// the shorter of the two boundary arcs of a 512-point resampling.
inline RegularityDiagnostic shape_and_turning(const std::vector<cplx>& loop, cplx z, int samples = 512, int sub = 64) {
    if (loop.size() < 3) throw std::invalid_argument("shape_and_turning: polyline is degenerate");
    RegularityDiagnostic rd;
    auto pts = resample_closed(loop, samples);
    rd.samples = samples;
    rd.shape = shape(pts, z);
    const int stride = samples / sub;
    std::vector<cplx> arc;
    for (int a = 0; a < sub; ++a)
        for (int b = a + 1; b < sub; ++b) {
            int i = a * stride, j = b * stride;
            int len = j - i;
            arc.clear();
            if (len <= samples / 2)
                for (int k = i; k <= j; ++k) arc.push_back(pts[k]);
            else
                for (int k = j; k <= i + samples; ++k) arc.push_back(pts[k % samples]);
            rd.max_turning = std::max(rd.max_turning, turning(arc));
            ++rd.pairs;
        }
    return rd;
}

}  // namespace mcm
