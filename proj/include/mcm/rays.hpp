#pragma once

// External rays, cut rays and their finite-depth approximants.

#include "classify.hpp"
#include "dynamics.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <unordered_map>
#include <vector>

namespace mcm {

struct touchable_ray : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class BranchMode { Auto, Sector, Continuation };

struct RayOptions {
    int depth = 40;
    int per_level = 32;
    BranchMode mode = BranchMode::Auto;
};

struct RayPolyline {
    Angle theta;
    int per_level = 32;
    std::vector<cplx> vertices;        ///< from the outermost equipotential inward
    std::vector<double> green_levels;  ///< G at each vertex
    std::vector<double> segment_diameters;
    cplx landing_estimate;
    double landing_error = 0;  ///< diameter of the last segment (heuristic)
};

struct AngleOrbit {
    std::vector<Angle> angles;
    std::vector<int> next;
    int cycle_start = 0;  ///< first index on the cycle
};

inline AngleOrbit angle_orbit(const Angle& theta, int n) {
    AngleOrbit o;
    std::map<Angle, int> seen;
    Angle a = theta;
    while (!seen.count(a)) {
        seen[a] = static_cast<int>(o.angles.size());
        o.angles.push_back(a);
        a = tau(a, n);
    }
    for (std::size_t i = 0; i + 1 < o.angles.size(); ++i) o.next.push_back(static_cast<int>(i + 1));
    o.next.push_back(seen[a]);
    o.cycle_start = seen[a];
    return o;
}

/// Solves log phi(z) = G + 2 pi i t by Newton's method, starting from z.
inline cplx bottcher_solve(const ParamContext& c, double G, double t, cplx z) {
    const cplx target(G, 2 * kPi * t);
    double last = 1e300;
    for (int it = 0; it < 80; ++it) {
        cplx L, Q;
        try {
            std::tie(L, Q) = log_bottcher(c, z);
        } catch (const domain_error&) {
            throw numeric_failure("ray seed refinement left the Boettcher region");
        }
        cplx d = L - target;
        d = {d.real(), std::remainder(d.imag(), 2 * kPi)};
        last = std::abs(d);
        if (last < 1e-14) return z;
        cplx step = d / Q;
        double cap = 0.25 * std::abs(z);
        if (std::abs(step) > cap) step *= cap / std::abs(step);
        z -= step;
    }
    if (last < 1e-11) return z;
    throw numeric_failure("ray seed refinement did not converge");
}

inline double point_set_diameter(const cplx* p, std::size_t count) {
    double d = 0;
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = i + 1; j < count; ++j) d = std::max(d, std::abs(p[i] - p[j]));
    return d;
}

/// Traces R(alpha) for every alpha in the forward orbit of theta. Inner segments are pullbacks
/// V_alpha[i] = h(V_{tau alpha}[i - per_level]).
inline std::vector<RayPolyline> trace_ray_orbit(const ParamContext& c, const Angle& theta, const RayOptions& opt = {}) {
    if (opt.depth < 0 || opt.per_level < 2) throw std::invalid_argument("ray: depth >= 0 and per_level >= 2 required");
    BranchMode mode = opt.mode;
    if (mode == BranchMode::Auto) mode = c.in_H ? BranchMode::Sector : BranchMode::Continuation;
    if (mode == BranchMode::Sector && !c.in_H) throw domain_error("ray: sector branches need lambda in H");
    const int n = c.n, K = opt.per_level;
    const AngleOrbit orb = angle_orbit(theta, n);
    const std::size_t m = orb.angles.size();
    const double v = std::max(c.green_level_v, std::log(c.escape_radius) + 0.05);

    std::vector<std::vector<cplx>> V(m);
    std::vector<std::vector<double>> GL(m);
    std::vector<int> pos(m, 0);
    for (std::size_t a = 0; a < m; ++a) {
        const double t = orb.angles[a].to_double();
        cplx z = std::exp(cplx(n * v, 2 * kPi * t));
        for (int j = 0; j <= K; ++j) {
            double G = n * v * std::pow(double(n), -double(j) / K);
            z = bottcher_solve(c, G, t, z * std::exp(cplx(G, 0) - std::log(std::abs(z))));
            V[a].push_back(z);
            GL[a].push_back(G);
        }
        pos[a] = sector_of_point(c, V[a][K]).position;
        if (mode == BranchMode::Sector) {
            int sym = sector_of_angle(orb.angles[a], n);
            if (coding_symbol(sym, n) && position_of_symbol(sym, n) != pos[a])
                throw inconsistency_error("ray: outer segment is not in the sector of its angle");
        }
    }
    for (int r = 1; r <= opt.depth; ++r) {
        std::vector<std::vector<cplx>> add(m);
        for (std::size_t a = 0; a < m; ++a) {
            const auto& src = V[orb.next[a]];
            cplx prev = V[a].back();
            for (int i = K * r + 1; i <= K * (r + 1); ++i) {
                cplx w = src[i - K];
                cplx z = mode == BranchMode::Sector ? inverse_branch_pos(c, pos[a], w) : inverse_nearest(c, w, prev);
                add[a].push_back(z);
                prev = z;
            }
        }
        for (std::size_t a = 0; a < m; ++a) {
            V[a].insert(V[a].end(), add[a].begin(), add[a].end());
            for (int i = 1; i <= K; ++i) GL[a].push_back(GL[orb.next[a]][K * r + i - K] / n);
        }
    }
    std::vector<RayPolyline> out;
    for (std::size_t a = 0; a < m; ++a) {
        RayPolyline p;
        p.theta = orb.angles[a];
        p.per_level = K;
        p.vertices = std::move(V[a]);
        p.green_levels = std::move(GL[a]);
        for (std::size_t s = 0; s + K < p.vertices.size(); s += K)
            p.segment_diameters.push_back(point_set_diameter(&p.vertices[s], K + 1));
        p.landing_estimate = p.vertices.back();
        p.landing_error = p.segment_diameters.empty() ? 0 : p.segment_diameters.back();
        out.push_back(std::move(p));
    }
    return out;
}

inline RayPolyline trace_external_ray(const ParamContext& c, const Angle& theta, const RayOptions& opt = {}) {
    return trace_ray_orbit(c, theta, opt).front();
}

/// Geometric decay rate of segment diameters (median of successive ratios over the last levels).
inline double landing_decay(const RayPolyline& r) {
    std::vector<double> q;
    const auto& d = r.segment_diameters;
    for (std::size_t i = d.size() / 2; i + 1 < d.size(); ++i)
        if (d[i] > 0 && d[i + 1] > 1e-300) q.push_back(d[i + 1] / d[i]);
    if (q.empty()) return 0;
    std::nth_element(q.begin(), q.begin() + q.size() / 2, q.end());
    return q[q.size() / 2];
}

/// Period of theta under tau, or 0 if theta is strictly preperiodic.
inline int angle_period(const Angle& theta, int n) {
    auto o = angle_orbit(theta, n);
    if (o.cycle_start != 0) return 0;
    return static_cast<int>(o.angles.size());
}

/// Landing estimate of a periodic ray refined by Newton's method on f^p(z) = z.
inline PeriodicPoint refine_periodic_landing(const ParamContext& c, const RayPolyline& ray) {
    int p = angle_period(ray.theta, c.n);
    if (p == 0) throw std::invalid_argument("refine_periodic_landing: angle is not periodic");
    cplx z = ray.landing_estimate;
    for (int i = 0; i < 50; ++i) {
        auto [fz, d] = f_iter_deriv(c, z, p);
        cplx step = (fz - z) / (d - 1.0);
        z -= step;
        if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(z))) break;
    }
    auto [fz, d] = f_iter_deriv(c, z, p);
    PeriodicPoint out;
    out.z = z;
    out.multiplier = d;
    out.residual = std::abs(fz - z);
    if (!(out.residual < 1e-10) || std::abs(z - ray.landing_estimate) > 100 * ray.landing_error + 1e-6)
        throw numeric_failure("refine_periodic_landing: Newton did not stay at the landing estimate");
    return out;
}

// ---------------------------------------------------------------------------------------------
// Sector orbits and cut-ray membership

struct SectorOrbit {
    std::vector<SectorId> sectors;  ///< sectors of f^k(z), k = 0..
    bool grand_orbit = false;       ///< stopped at 0 or infinity
};

/// Sectors of f^k(z) for k <= m. Near 0 and infinity f acts on arguments by t -> n t (or
/// arg lambda - n t), which is followed directly to avoid overflow.
inline SectorOrbit sector_orbit(const ParamContext& c, cplx z, int m, double zero_tol = 0) {
    SectorOrbit out;
    bool polar = false;
    double t = 0;
    const double n = c.n;
    for (int k = 0; k <= m; ++k) {
        if (polar) {
            out.sectors.push_back(sector_of_point(c, std::polar(1.0, t)));
            t = std::fmod(n * t, 2 * kPi);
            continue;
        }
        double a = std::abs(z);
        if (a <= zero_tol || is_infinite(z)) {
            out.grand_orbit = true;
            return out;
        }
        out.sectors.push_back(sector_of_point(c, z));
        if (a > 1e30) {
            polar = true;
            t = std::fmod(n * std::arg(z), 2 * kPi);
        } else if (a < 1e-30) {
            polar = true;
            t = std::fmod(c.arg_lambda - n * std::arg(z), 2 * kPi);
        } else {
            z = f_eval(c, z);
        }
    }
    return out;
}

/// Position classes (mod n) of the itinerary of a cut ray.
struct CutRayCode {
    int n = 3;
    Itinerary s;

    static CutRayCode of(const Angle& theta, int n) {
        auto ac = angle_itinerary(theta, n, 64);
        return {n, ac.itinerary};
    }
    int symbol(std::size_t k) const { return s.at(k); }
    int position(std::size_t k) const { return position_of_symbol(s.at(k), n); }
    bool matches(std::size_t k, const SectorId& sid) const {
        int p = position(k) % n;
        if (sid.position % n == p) return true;
        if (sid.on_boundary && ((sid.position + 2 * n - 1) % (2 * n)) % n == p) return true;
        return false;
    }
};

inline bool cut_ray_membership(const ParamContext& c, const CutRayCode& code, int m, cplx z, double zero_tol = 0) {
    if (z == cplx(0, 0) || is_infinite(z)) return true;
    auto so = sector_orbit(c, z, m, zero_tol);
    for (std::size_t k = 0; k < so.sectors.size(); ++k)
        if (!code.matches(k, so.sectors[k])) return false;
    return true;
}

inline bool cut_ray_membership(const ParamContext& c, const Angle& theta, int m, cplx z) {
    return cut_ray_membership(c, CutRayCode::of(theta, c.n), m, z);
}

// ---------------------------------------------------------------------------------------------
// Raster helpers: union-find labeling and marching squares

struct DisjointSets {
    std::vector<int> parent;
    explicit DisjointSets(std::size_t count) : parent(count) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

/// Connected components (4- or 8-neighbour) of pixels with equal nonnegative keys; -1 pixels
/// are background. Labels are 0..count-1 in raster order; background gets -1.
inline int label_components(const std::vector<long long>& key, int w, int h, std::vector<int>& labels,
                            bool diagonal = false) {
    DisjointSets ds(key.size());
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            std::size_t k = std::size_t(j) * w + i;
            if (key[k] < 0) continue;
            if (i + 1 < w && key[k + 1] == key[k]) ds.unite(int(k), int(k + 1));
            if (j + 1 < h && key[k + w] == key[k]) ds.unite(int(k), int(k + w));
            if (diagonal && j + 1 < h) {
                if (i + 1 < w && key[k + w + 1] == key[k]) ds.unite(int(k), int(k + w + 1));
                if (i > 0 && key[k + w - 1] == key[k]) ds.unite(int(k), int(k + w - 1));
            }
        }
    labels.assign(key.size(), -1);
    std::vector<int> root_label(key.size(), -1);
    int count = 0;
    for (std::size_t k = 0; k < key.size(); ++k) {
        if (key[k] < 0) continue;
        int r = ds.find(int(k));
        if (root_label[r] < 0) root_label[r] = count++;
        labels[k] = root_label[r];
    }
    return count;
}

/// Closed contour loops of a binary mask (pixel centers as samples, outside the grid = 0).
/// Saddle cells separate diagonal neighbours, matching 4-connectivity of the mask.
inline std::vector<std::vector<cplx>> contour_loops(const std::vector<std::uint8_t>& mask, int w, int h, const Window& win) {
    const int W = w + 2, H = h + 2;  // padded: padded index i corresponds to pixel i - 1
    auto val = [&](int i, int j) -> int {
        int x = i - 1, y = j - 1;
        if (x < 0 || y < 0 || x >= w || y >= h) return 0;
        return mask[std::size_t(y) * w + x] ? 1 : 0;
    };
    // edge ids: horizontal edge (i,j)-(i+1,j) -> 2*(j*W+i); vertical edge (i,j)-(i,j+1) -> 2*(j*W+i)+1
    auto hid = [&](int i, int j) { return 2LL * (j * (long long)W + i); };
    auto vid = [&](int i, int j) { return 2LL * (j * (long long)W + i) + 1; };
    auto point = [&](long long id) {
        long long base = id / 2;
        int i = int(base % W), j = int(base / W);
        double x0 = win.x(i - 1, w), y0 = win.y(j - 1, h);
        if (id % 2 == 0) return cplx(0.5 * (x0 + win.x(i, w)), y0);
        return cplx(x0, 0.5 * (y0 + win.y(j, h)));
    };
    std::unordered_map<long long, std::vector<long long>> adj;
    auto seg = [&](long long a, long long b) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    };
    for (int j = 0; j + 1 < H; ++j)
        for (int i = 0; i + 1 < W; ++i) {
            int a = val(i, j), b = val(i + 1, j), cc = val(i + 1, j + 1), d = val(i, j + 1);
            int cs = a | (b << 1) | (cc << 2) | (d << 3);
            if (cs == 0 || cs == 15) continue;
            long long top = hid(i, j), right = vid(i + 1, j), bottom = hid(i, j + 1), left = vid(i, j);
            switch (cs) {
                case 1: case 14: seg(left, top); break;
                case 2: case 13: seg(top, right); break;
                case 4: case 11: seg(right, bottom); break;
                case 8: case 7: seg(bottom, left); break;
                case 3: case 12: seg(left, right); break;
                case 6: case 9: seg(top, bottom); break;
                case 5: seg(left, top); seg(right, bottom); break;
                case 10: seg(top, right); seg(bottom, left); break;
            }
        }
    std::vector<std::vector<cplx>> loops;
    std::unordered_map<long long, bool> used;
    std::vector<long long> keys;
    keys.reserve(adj.size());
    for (auto& kv : adj) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());
    for (long long start : keys) {
        if (used[start]) continue;
        std::vector<cplx> loop;
        long long prev = -1, cur = start;
        while (true) {
            used[cur] = true;
            loop.push_back(point(cur));
            const auto& nb = adj[cur];
            long long nxt = -1;
            for (long long x : nb)
                if (x != prev && !used[x]) { nxt = x; break; }
            if (nxt < 0) break;
            prev = cur;
            cur = nxt;
        }
        loop.push_back(loop.front());
        loops.push_back(std::move(loop));
    }
    return loops;
}

// ---------------------------------------------------------------------------------------------
// Cut-ray approximants on a grid

struct CutRayApprox {
    Angle theta;
    int m = 0;
    CutRayCode code;
    Window window;
    int width = 0, height = 0;
    std::vector<std::uint8_t> member;
    std::vector<std::uint32_t> pattern;  ///< bit k set when f^k(z) lies in S_{-s_k}
    std::vector<int> blob_label;
    int blob_count = 0;     ///< components with one sign pattern, 8-neighbour connectivity
    int blob_count_4 = 0;   ///< plain 4-connected components of the membership mask
    std::vector<long> blob_sizes;
    std::vector<std::vector<cplx>> boundary;
    std::vector<cplx> touch_points;      ///< clustered contacts between blobs
    std::vector<cplx> predicted_touches; ///< branch preimages of 0 on the approximant
    bool resolution_warning = false;
    std::string warning;

    bool contains(const ParamContext& c, cplx z) const { return cut_ray_membership(c, code, m, z); }
};

/// Points z with f^j(z) = 0 for some j <= m whose first j sectors follow +-s_k.
inline std::vector<cplx> cut_ray_zero_preimages(const ParamContext& c, const CutRayCode& code, int m) {
    const int n = c.n;
    std::vector<cplx> out{cplx(0, 0)};
    for (int j = 1; j <= m; ++j)
        for (long mask = 0; mask < (1L << j); ++mask) {
            cplx z(0, 0);
            for (int k = j - 1; k >= 0; --k)
                z = inverse_branch_pos(c, (code.position(k) + ((mask >> k) & 1) * n) % (2 * n), z);
            out.push_back(z);
        }
    return out;
}

inline CutRayApprox trace_cut_ray_boundary(const ParamContext& c, const Angle& theta, int m, const Window& win, int w,
                                           int h, int jobs = 1) {
    if (m < 0) throw std::invalid_argument("cut ray depth must be >= 0");
    if (m > 30) throw std::invalid_argument("cut ray depth must be <= 30");
    CutRayApprox a;
    a.theta = theta;
    a.m = m;
    a.code = CutRayCode::of(theta, c.n);
    a.window = win;
    a.width = w;
    a.height = h;
    const std::size_t N = std::size_t(w) * h;
    a.member.assign(N, 0);
    a.pattern.assign(N, 0);
    parallel_for(std::size_t(h), jobs, [&](std::size_t j) {
        for (int i = 0; i < w; ++i) {
            std::size_t k = j * w + i;
            cplx z = win.at(i, int(j), w, h);
            auto so = sector_orbit(c, z, m);
            bool ok = true;
            std::uint32_t pat = 0;
            for (std::size_t t = 0; t < so.sectors.size(); ++t) {
                if (!a.code.matches(t, so.sectors[t])) { ok = false; break; }
                if (so.sectors[t].position != a.code.position(t)) pat |= 1u << t;
            }
            a.member[k] = ok;
            a.pattern[k] = pat;
        }
    });
    std::vector<long long> key(N, -1);
    for (std::size_t k = 0; k < N; ++k)
        if (a.member[k]) key[k] = a.pattern[k];
    a.blob_count = label_components(key, w, h, a.blob_label, true);
    {
        std::vector<long long> plain(N, -1);
        std::vector<int> tmp;
        for (std::size_t k = 0; k < N; ++k)
            if (a.member[k]) plain[k] = 0;
        a.blob_count_4 = label_components(plain, w, h, tmp);
    }
    a.blob_sizes.assign(a.blob_count, 0);
    for (int l : a.blob_label)
        if (l >= 0) ++a.blob_sizes[l];
    a.boundary = contour_loops(a.member, w, h, win);

    const double px = std::max((win.x1 - win.x0) / w, (win.y1 - win.y0) / h);
    // contacts: member pixels of different blobs within two pixels of each other
    std::vector<cplx> contacts;
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            std::size_t k = std::size_t(j) * w + i;
            if (a.blob_label[k] < 0) continue;
            for (int dj = 0; dj <= 2; ++dj)
                for (int di = -2; di <= 2; ++di) {
                    if (dj == 0 && di <= 0) continue;
                    int ii = i + di, jj = j + dj;
                    if (ii < 0 || ii >= w || jj >= h) continue;
                    std::size_t q = std::size_t(jj) * w + ii;
                    if (a.blob_label[q] >= 0 && a.blob_label[q] != a.blob_label[k])
                        contacts.push_back(0.5 * (win.at(i, j, w, h) + win.at(ii, jj, w, h)));
                }
        }
    // cluster contacts within a few pixels
    std::vector<int> cl(contacts.size(), -1);
    std::vector<cplx> sum;
    std::vector<int> cnt;
    for (std::size_t q = 0; q < contacts.size(); ++q) {
        int found = -1;
        for (std::size_t r = 0; r < sum.size(); ++r)
            if (std::abs(sum[r] / double(cnt[r]) - contacts[q]) < 4 * px) { found = int(r); break; }
        if (found < 0) {
            sum.push_back(contacts[q]);
            cnt.push_back(1);
        } else {
            sum[found] += contacts[q];
            ++cnt[found];
        }
    }
    for (std::size_t r = 0; r < sum.size(); ++r) a.touch_points.push_back(sum[r] / double(cnt[r]));
    for (cplx p : cut_ray_zero_preimages(c, a.code, m))
        if (p.real() >= win.x0 && p.real() <= win.x1 && p.imag() >= win.y0 && p.imag() <= win.y1)
            a.predicted_touches.push_back(p);

    const long expected = 1L << (m + 1);
    long small = 0;
    for (long s : a.blob_sizes)
        if (s < 4) ++small;
    if (a.blob_count != expected || small > 0) {
        a.resolution_warning = true;
        a.warning = "measured " + std::to_string(a.blob_count) + " blobs (" + std::to_string(small) +
                    " below 4 pixels), expected " + std::to_string(expected);
    }
    return a;
}

// ---------------------------------------------------------------------------------------------
// Touchability

struct TouchReport {
    bool touchable = false;
    int orbit_index = -1;  ///< first critical-orbit iterate found on a cut ray
    Angle angle;
    double min_margin = 1e300;  ///< smallest angular distance to a sector boundary seen on matches
};

/// Checks whether the critical orbit meets any cut ray in the tau-cycles of the given angles,
/// to finite depth. Orbit points within tol of a critical ray count as members.
inline TouchReport touchability(const ParamContext& c, const std::vector<Angle>& angles, int depth = 24,
                                int orbit_len = 64, double tol = 1e-6, const std::vector<cplx>* orbit_override = nullptr) {
    TouchReport rep;
    std::vector<Angle> cyc;
    for (const auto& t : angles) {
        auto o = angle_orbit(t, c.n);
        for (auto& x : o.angles)
            if (std::find(cyc.begin(), cyc.end(), x) == cyc.end()) cyc.push_back(x);
    }
    std::vector<cplx> orbit;
    if (orbit_override) {
        orbit = *orbit_override;
    } else {
        cplx z = c.vplus;
        for (int j = 0; j < orbit_len; ++j) {
            orbit.push_back(z);
            if (std::abs(z) > c.escape_radius) break;
            z = f_eval(c, z);
        }
    }
    for (std::size_t j = 0; j < orbit.size(); ++j) {
        for (const auto& t : cyc) {
            auto code = CutRayCode::of(t, c.n);
            auto so = sector_orbit(c, orbit[j], depth);
            bool ok = true;
            cplx z = orbit[j];
            for (std::size_t k = 0; k < so.sectors.size() && ok; ++k) {
                SectorId sid = so.sectors[k];
                if (!code.matches(k, sid)) {
                    // tolerance: accept a neighbour sector when z is within tol of the shared ray
                    double off = std::abs(z) < 1e30 && z != cplx(0, 0) ? sector_offset(c, sid.position, z) : 0.0;
                    double dist_edge = (0.5 - std::abs(off)) * (kPi / c.n) * std::abs(z);
                    int nb = off > 0 ? sid.position + 1 : sid.position + 2 * c.n - 1;
                    SectorId other{symbol_at_position(nb, c.n), nb % (2 * c.n), false};
                    if (!(dist_edge < tol && code.matches(k, other))) ok = false;
                }
                if (ok && std::abs(z) < 1e30 && z != cplx(0, 0)) z = f_eval(c, z);
            }
            if (ok) {
                rep.touchable = true;
                rep.orbit_index = int(j);
                rep.angle = t;
                return rep;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Preimage cut rays

struct PreimageCutRay {
    Angle alpha;
    CutRayCode code;            ///< itinerary of alpha (first symbol may be 0 or n)
    RayPolyline ray;            ///< R(alpha)
    int lift_position = 0;      ///< sector position of the lift omega^alpha
    int m = 0;
    long ray_vertices_checked = 0;
    long ray_vertices_off = 0;  ///< traced ray vertices failing the approximant membership

    bool member(const ParamContext& c, cplx z) const { return cut_ray_membership(c, code, m, z); }
    /// Membership in the lift omega^alpha (the half in the sector of R(alpha)).
    bool lift_member(const ParamContext& c, cplx z) const {
        if (z == cplx(0, 0) || is_infinite(z)) return true;
        return member(c, z) && sector_of_point(c, z).position == lift_position;
    }
};

inline PreimageCutRay preimage_cut_ray(const ParamContext& c, const Angle& alpha, int m, int ray_depth = 12,
                                       bool check_touch = true) {
    auto orb = angle_orbit(alpha, c.n);
    const Angle& cyc = orb.angles[orb.cycle_start];
    auto cls = angle_itinerary(cyc, c.n);
    if (!cls.in_theta) throw std::invalid_argument("preimage_cut_ray: alpha must be eventually mapped into a Theta cycle");
    if (!c.in_H) throw domain_error("preimage_cut_ray: lambda must lie in H");
    if (check_touch) {
        auto t = touchability(c, {cyc});
        if (t.touchable) throw touchable_ray("preimage_cut_ray: cut ray of " + t.angle.str() + " meets the critical orbit");
    }
    PreimageCutRay p;
    p.alpha = alpha;
    p.code = CutRayCode::of(alpha, c.n);
    p.m = m;
    RayOptions ro;
    ro.depth = ray_depth;
    p.ray = trace_external_ray(c, alpha, ro);
    p.lift_position = sector_of_point(c, p.ray.vertices[p.ray.per_level]).position;
    for (std::size_t i = p.ray.per_level; i < p.ray.vertices.size(); ++i) {
        ++p.ray_vertices_checked;
        if (!p.member(c, p.ray.vertices[i])) ++p.ray_vertices_off;
    }
    return p;
}

// ---------------------------------------------------------------------------------------------
// Full rays omega^alpha as polylines from infinity to 0

struct FullRay {
    Angle alpha;
    std::vector<cplx> vertices;  ///< from |z| = far down to |z| = near
};

/// omega^alpha = h_{s0}(Omega^{tau alpha}), expanded recursively around the cycle.
/// The base curve at depth 0 is the radial line at argument 2 pi alpha.
inline FullRay full_ray_polyline(const ParamContext& c, const Angle& alpha, int depth = 6, int base_samples = 240,
                                 double far = 1e4) {
    if (!c.in_H) throw domain_error("full_ray_polyline: lambda must lie in H");
    const double near = 1.0 / far;
    auto orb = angle_orbit(alpha, c.n);
    const std::size_t m = orb.angles.size();
    auto radial = [&](double arg) {
        std::vector<cplx> v;
        for (int i = 0; i < base_samples; ++i) {
            double r = far * std::pow(near / far, double(i) / (base_samples - 1));
            v.push_back(std::polar(r, arg));
        }
        return v;
    };
    auto extend = [&](std::vector<cplx>& v) {
        // radial extensions so that the curve reaches |z| = far and |z| = near again
        std::vector<cplx> head;
        cplx f0 = v.front();
        for (double r = std::abs(f0) * 2; r < far; r *= 2) head.push_back(f0 / std::abs(f0) * r);
        head.push_back(f0 / std::abs(f0) * far);
        std::reverse(head.begin(), head.end());
        cplx b = v.back();
        std::vector<cplx> tail;
        for (double r = std::abs(b) / 2; r > near; r /= 2) tail.push_back(b / std::abs(b) * r);
        tail.push_back(b / std::abs(b) * near);
        v.insert(v.begin(), head.begin(), head.end());
        v.insert(v.end(), tail.begin(), tail.end());
    };
    std::vector<std::vector<cplx>> P(m);
    std::vector<int> pos(m);
    for (std::size_t a = 0; a < m; ++a) {
        P[a] = radial(2 * kPi * orb.angles[a].to_double());
        pos[a] = sector_of_point(c, std::polar(1.0, 2 * kPi * orb.angles[a].to_double())).position;
        int sym = sector_of_angle(orb.angles[a], c.n);
        if (coding_symbol(sym, c.n)) pos[a] = position_of_symbol(sym, c.n);
    }
    // preimage angles take the sector of their traced ray
    for (std::size_t a = 0; a < m; ++a) {
        int sym = sector_of_angle(orb.angles[a], c.n);
        if (!coding_symbol(sym, c.n)) {
            RayOptions ro;
            ro.depth = 0;
            auto r = trace_external_ray(c, orb.angles[a], ro);
            pos[a] = sector_of_point(c, r.vertices.back()).position;
        }
    }
    for (int d = 0; d < depth; ++d) {
        std::vector<std::vector<cplx>> Q(m);
        for (std::size_t a = 0; a < m; ++a) {
            const auto& src = P[orb.next[a]];
            std::vector<cplx> loop(src);
            for (auto it = src.rbegin(); it != src.rend(); ++it) loop.push_back(-*it);
            std::vector<cplx> img;
            img.reserve(loop.size());
            for (cplx w : loop) img.push_back(inverse_branch_pos(c, pos[a], w));
            if (std::abs(img.front()) < std::abs(img.back())) std::reverse(img.begin(), img.end());
            extend(img);
            Q[a] = std::move(img);
        }
        P = std::move(Q);
    }
    return {alpha, P[0]};
}

// ---------------------------------------------------------------------------------------------
// Intersection counting

struct IntersectionReport {
    int J = 0;
    long predicted = 0;  ///< 2^{J+1}
    long located = 0;    ///< 0, infinity and the numerically located finite common points
    std::vector<cplx> points;  ///< finite common points other than 0
    double max_match_error = 0;
    bool matched = false;
};

inline IntersectionReport intersection_count(const ParamContext& c, const Angle& alpha, const Angle& beta, int m = -1,
                                             double tol = 1e-6) {
    const int n = c.n;
    IntersectionReport rep;
    rep.J = first_divergence(alpha, beta, n);  // throws same_cut_ray
    rep.predicted = 1L << (rep.J + 1);
    if (m < 0) m = rep.J + 8;
    auto ca = CutRayCode::of(alpha, n), cb = CutRayCode::of(beta, n);
    // preimage tree of 0 through all 2n branches, depth J+1
    std::vector<cplx> layer{cplx(0, 0)};
    std::vector<cplx> common;
    for (int j = 1; j <= rep.J + 1; ++j) {
        std::vector<cplx> next;
        for (cplx w : layer)
            for (cplx z : preimages(c, w)) next.push_back(newton_polish_preimage(c, z, w, 8));
        for (cplx z : next)
            if (cut_ray_membership(c, ca, m, z, 1e-9) && cut_ray_membership(c, cb, m, z, 1e-9)) common.push_back(z);
        layer = std::move(next);
    }
    rep.points = common;
    rep.located = 2 + static_cast<long>(common.size());
    // symbolic construction: branch words with |a_k| = |s_k| for k < j <= J
    std::vector<cplx> symbolic;
    for (int j = 1; j <= rep.J; ++j)
        for (long mask = 0; mask < (1L << j); ++mask) {
            cplx z(0, 0);
            for (int k = j - 1; k >= 0; --k) z = inverse_branch_pos(c, (ca.position(k) + ((mask >> k) & 1) * n) % (2 * n), z);
            symbolic.push_back(z);
        }
    rep.matched = symbolic.size() == common.size();
    for (cplx s : symbolic) {
        double best = 1e300;
        for (cplx q : common) best = std::min(best, std::abs(q - s));
        rep.max_match_error = std::max(rep.max_match_error, best);
    }
    if (rep.max_match_error > tol) rep.matched = false;
    if (rep.located != rep.predicted) rep.matched = false;
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Two-point meeting of Omega^theta with the boundary of B

struct BoundaryPoints {
    cplx p, q;  ///< landing points of R(theta) and R(theta + 1/2)
    double error = 0;
    bool refined = false;
};

inline BoundaryPoints boundary_intersection_points(const ParamContext& c, const Angle& theta, int depth = 60) {
    RayOptions ro;
    ro.depth = depth;
    auto r1 = trace_external_ray(c, theta, ro);
    auto r2 = trace_external_ray(c, theta.shifted(1, 2), ro);
    BoundaryPoints b{r1.landing_estimate, r2.landing_estimate, std::max(r1.landing_error, r2.landing_error), false};
    if (angle_period(theta, c.n) > 0) {
        try {
            b.p = refine_periodic_landing(c, r1).z;
            b.q = refine_periodic_landing(c, r2).z;
            b.refined = true;
        } catch (const numeric_failure&) {
        }
    }
    return b;
}

}  // namespace mcm
