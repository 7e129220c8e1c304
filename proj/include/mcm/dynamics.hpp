#pragma once

// Numerics of f(z) = z^n + lambda / z^n.
//
// Complex arithmetic here is kept sign-symmetric (own sqrt, integer powers by repeated
// multiplication) so that results at conj(lambda), conj(z) are exact mirrors.

#include "angles.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcm {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

struct branch_cut_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct inconsistency_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numeric_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline cplx ipow(cplx z, int e) {
    cplx r(1.0, 0.0);
    cplx b = z;
    while (e > 0) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

/// Principal square root written so that csqrt(conj z) == conj(csqrt z) bit for bit.
inline cplx csqrt(cplx z) {
    double x = z.real(), y = z.imag();
    double m = std::hypot(x, y);
    if (m == 0.0) return {0.0, 0.0};
    if (x >= 0.0) {
        double s = std::sqrt(0.5 * (m + x));
        return {s, y / (2.0 * s)};
    }
    double t = std::sqrt(0.5 * (m - x));
    return {std::fabs(y) / (2.0 * t), std::copysign(t, y)};
}

/// Angle in [0, 2pi).
inline double arg_0_2pi(cplx z) {
    double a = std::atan2(z.imag(), z.real());
    return a < 0 ? a + 2 * kPi : a;
}

struct ParamContext {
    cplx lambda;
    int n = 3;
    double arg_lambda = 0;  ///< principal, in (-pi, pi]
    cplx c0;
    std::vector<cplx> critical_points;  ///< c_k = c0 e^{k pi i / n}, k = 0..2n-1
    cplx vplus, vminus;
    double escape_radius = 2;
    double green_level_v = 1;
    bool in_H = false;  ///< arg lambda in (0, 2pi/(n-1))

    static ParamContext make(cplx lambda, int n, double v = 1.0) {
        if (n < 3) throw std::invalid_argument("n must be >= 3");
        if (lambda == cplx(0, 0)) throw std::invalid_argument("lambda must be nonzero");
        ParamContext c;
        c.lambda = lambda;
        c.n = n;
        c.green_level_v = v;
        c.arg_lambda = std::atan2(lambda.imag(), lambda.real());
        double mod = std::abs(lambda);
        c.c0 = std::polar(std::pow(mod, 1.0 / (2 * n)), c.arg_lambda / (2 * n));
        for (int k = 0; k < 2 * n; ++k) c.critical_points.push_back(c.c0 * std::polar(1.0, k * kPi / n));
        c.vplus = 2.0 * csqrt(lambda);
        c.vminus = -c.vplus;
        c.in_H = c.arg_lambda > 0 && c.arg_lambda < 2 * kPi / (n - 1);
        double R = std::max(2.0, std::pow(2 * mod, 1.0 / (2 * n)));
        auto ok = [&](double r) { return std::pow(r, n) - mod / std::pow(r, n) >= 2 * r; };
        while (!ok(R)) R *= 1.0001;
        c.escape_radius = R;
        return c;
    }

    double arg_c0() const { return arg_lambda / (2 * n); }

    /// Radius r0 with {|z| <= r0} contained in the trap door: |lambda|/r0^n - r0^n >= R.
    double trap_radius() const {
        double m = std::abs(lambda), R = escape_radius;
        double x = (-R + std::sqrt(R * R + 4 * m)) / 2;
        return std::pow(x, 1.0 / n);
    }
};

inline bool is_infinite(cplx z) { return std::isinf(z.real()) || std::isinf(z.imag()); }

inline cplx f_eval(const ParamContext& c, cplx z) {
    if (z == cplx(0, 0) || is_infinite(z)) return {std::numeric_limits<double>::infinity(), 0.0};
    cplx a = ipow(z, c.n);
    return a + c.lambda / a;
}

inline cplx f_deriv(const ParamContext& c, cplx z) {
    cplx a = ipow(z, c.n);
    return double(c.n) * (a - c.lambda / a) / z;
}

inline cplx f_iter(const ParamContext& c, cplx z, int k) {
    for (int i = 0; i < k; ++i) z = f_eval(c, z);
    return z;
}

/// f^k(z) together with (f^k)'(z).
inline std::pair<cplx, cplx> f_iter_deriv(const ParamContext& c, cplx z, int k) {
    cplx d(1, 0);
    for (int i = 0; i < k; ++i) {
        d *= f_deriv(c, z);
        z = f_eval(c, z);
    }
    return {z, d};
}

/// Index of the first iterate with |f^k z| > R, or -1 within the budget.
inline int escape_time(const ParamContext& c, cplx z, int budget) {
    for (int k = 0; k <= budget; ++k) {
        if (!(std::abs(z) <= c.escape_radius)) return k;
        z = f_eval(c, z);
    }
    return -1;
}

enum class EscapeStatus { Escaping, NotEscaping, Indeterminate };

struct GreenResult {
    EscapeStatus status = EscapeStatus::NotEscaping;
    double G = 0;       ///< Green function value
    cplx dlogphi{0, 0}; ///< derivative of log phi; grad G = conj(dlogphi)
    int escape_iterate = -1;
};

/// G(z) = lim n^{-k} log|f^k z| and d/dz log phi, iterated until lambda/f^k(z)^{2n} < tol.
inline GreenResult green_full(const ParamContext& c, cplx z, int budget = 512, double tol = 1e-17) {
    GreenResult r;
    if (z == cplx(0, 0) || is_infinite(z)) {
        r.status = EscapeStatus::Escaping;
        r.G = std::numeric_limits<double>::infinity();
        return r;
    }
    const double R = c.escape_radius, lam = std::abs(c.lambda);
    cplx w = z;
    cplx Q = 1.0 / z;
    double scale = 1.0;
    int k = 0;
    while (k < budget && std::abs(w) <= R) {
        cplx a = ipow(w, c.n);
        cplx b = c.lambda / a;
        if (a + b == cplx(0, 0)) {
            r.status = EscapeStatus::Escaping;  // lands on a preimage of 0, hence of infinity
            r.G = std::numeric_limits<double>::infinity();
            r.escape_iterate = k + 1;
            return r;
        }
        Q *= (a - b) / (a + b);
        w = a + b;
        scale /= c.n;
        ++k;
        if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
            r.status = EscapeStatus::Indeterminate;
            return r;
        }
    }
    if (std::abs(w) <= R) {
        r.status = EscapeStatus::NotEscaping;
        return r;
    }
    r.escape_iterate = k;
    for (int guard = 0; guard < 64; ++guard) {
        double m = std::abs(w);
        if (lam / std::pow(m, 2 * c.n) < tol || m > 1e60) break;
        cplx a = ipow(w, c.n);
        cplx b = c.lambda / a;
        Q *= (a - b) / (a + b);
        w = a + b;
        scale /= c.n;
    }
    r.status = EscapeStatus::Escaping;
    r.G = scale * std::log(std::abs(w));
    r.dlogphi = Q;
    return r;
}

struct GreenValue {
    EscapeStatus status;
    double value;
};

inline GreenValue green(const ParamContext& c, cplx z, double tol = 1e-17, int budget = 512) {
    auto g = green_full(c, z, budget, tol);
    return {g.status, g.G};
}

/// Boettcher coordinate via log phi = log z + sum n^{-(k+1)} Log(1 + lambda / f^k(z)^{2n}).
/// Valid where every |lambda / f^k(z)^{2n}| < 1, which holds for |z| >= R.
inline cplx bottcher(const ParamContext& c, cplx z, double tol = 1e-17) {
    if (z == cplx(0, 0) || is_infinite(z)) throw domain_error("bottcher: z must be finite and nonzero");
    cplx logphi = std::log(z);
    cplx w = z;
    double scale = 1.0 / c.n;
    for (int k = 0; k < 200; ++k) {
        cplx a = ipow(w, c.n);
        cplx u = c.lambda / (a * a);
        if (std::abs(u) >= 1.0) throw domain_error("bottcher: point outside the outer Boettcher region");
        logphi += scale * std::log(1.0 + u);
        if (std::abs(u) < tol) return std::exp(logphi);
        w = a + c.lambda / a;
        scale /= c.n;
        if (!std::isfinite(w.real())) break;
    }
    return std::exp(logphi);
}

/// log phi with its derivative (same validity region as bottcher).
inline std::pair<cplx, cplx> log_bottcher(const ParamContext& c, cplx z, double tol = 1e-17) {
    cplx logphi = std::log(z);
    cplx Q = 1.0 / z;
    cplx w = z;
    double scale = 1.0 / c.n;
    for (int k = 0; k < 200; ++k) {
        cplx a = ipow(w, c.n);
        cplx b = c.lambda / a;
        cplx u = b / a;
        if (std::abs(u) >= 1.0) throw domain_error("bottcher: point outside the outer Boettcher region");
        logphi += scale * std::log(1.0 + u);
        Q *= (a - b) / (a + b);
        if (std::abs(u) < tol) break;
        w = a + b;
        scale /= c.n;
    }
    return {logphi, Q};
}

struct SectorId {
    int k = 0;             ///< symbol in I
    int position = 0;      ///< 0..2n-1 counterclockwise from S_0
    bool on_boundary = false;
};

inline int position_of_symbol(int k, int n) { return k >= 0 ? k : n - k; }
inline int symbol_at_position(int pos, int n) {
    pos = ((pos % (2 * n)) + 2 * n) % (2 * n);
    return pos <= n ? pos : n - pos;
}

/// Sector containing z; a point on a critical ray belongs to the sector on its counterclockwise side.
inline SectorId sector_of_point(const ParamContext& c, cplx z, double tol = 1e-12) {
    double t = std::atan2(z.imag(), z.real()) - c.arg_c0();
    const double w = kPi / c.n;
    t = std::fmod(t, 2 * kPi);
    if (t < 0) t += 2 * kPi;
    double x = t / w;
    int pos = static_cast<int>(std::floor(x));
    if (pos >= 2 * c.n) pos = 2 * c.n - 1;
    double frac = x - std::floor(x);
    SectorId s;
    if (frac > 1 - tol / w) {
        pos = (pos + 1) % (2 * c.n);
        s.on_boundary = true;
    } else if (frac < tol / w) {
        s.on_boundary = true;
    }
    s.position = pos;
    s.k = symbol_at_position(pos, c.n);
    return s;
}

/// Distance of w from the critical value rays {t v+ : t >= 1} and {t v- : t >= 1}.
inline double critical_value_ray_distance(const ParamContext& c, cplx w) {
    double best = std::numeric_limits<double>::infinity();
    for (cplx v : {c.vplus, c.vminus}) {
        cplx u = v / std::abs(v);
        double t = (w * std::conj(u)).real();
        double base = std::abs(v);
        double d = t >= base ? std::abs((w * std::conj(u)).imag()) : std::abs(w - v);
        best = std::min(best, d);
    }
    return best;
}

/// All 2n preimages of w.
inline std::vector<cplx> preimages(const ParamContext& c, cplx w) {
    cplx disc = csqrt(w * w - 4.0 * c.lambda);
    cplx u1 = (std::abs(w + disc) >= std::abs(w - disc)) ? (w + disc) / 2.0 : (w - disc) / 2.0;
    cplx u2 = c.lambda / u1;
    std::vector<cplx> out;
    for (cplx u : {u1, u2}) {
        double m = std::pow(std::abs(u), 1.0 / c.n);
        double a = std::arg(u) / c.n;
        for (int j = 0; j < c.n; ++j) out.push_back(std::polar(m, a + 2 * kPi * j / c.n));
    }
    return out;
}

inline cplx newton_polish_preimage(const ParamContext& c, cplx z, cplx w, int iters = 4) {
    for (int i = 0; i < iters; ++i) {
        cplx r = f_eval(c, z) - w;
        if (std::abs(r) <= 1e-15 * std::max(1.0, std::abs(w))) break;
        z -= r / f_deriv(c, z);
    }
    return z;
}

/// Signed angular distance of z from the middle of the sector at `pos`, in units of the sector width.
inline double sector_offset(const ParamContext& c, int pos, cplx z) {
    double mid = c.arg_c0() + (pos + 0.5) * kPi / c.n;
    double d = std::remainder(std::atan2(z.imag(), z.real()) - mid, 2 * kPi);
    return d / (kPi / c.n);
}

/// The preimage of w inside the sector with counterclockwise position `pos`.
inline cplx inverse_branch_pos(const ParamContext& c, int pos, cplx w, double cut_tol = 1e-12) {
    if (critical_value_ray_distance(c, w) < cut_tol * std::max(1.0, std::abs(w)))
        throw branch_cut_error("inverse_branch: w lies on a critical value ray");
    auto cands = preimages(c, w);
    cplx best = 0;
    double bd = 1e300;
    for (cplx z : cands) {
        double d = std::abs(sector_offset(c, pos, z));
        if (d < bd) { bd = d; best = z; }
    }
    if (bd > 0.5 + 1e-9) throw inconsistency_error("inverse_branch: no preimage in the requested sector");
    best = newton_polish_preimage(c, best, w);
    if (std::abs(f_eval(c, best) - w) > 1e-8 * std::max(1.0, std::abs(w)))
        throw inconsistency_error("inverse_branch: residual too large");
    return best;
}

/// h_k : Upsilon -> int(S_k).
inline cplx inverse_branch(const ParamContext& c, int k, cplx w) {
    if (!valid_symbol(k, c.n)) throw std::invalid_argument("inverse_branch: symbol not in I");
    return inverse_branch_pos(c, position_of_symbol(k, c.n), w);
}

/// The preimage of w closest to a reference point (branch selection by continuation).
inline cplx inverse_nearest(const ParamContext& c, cplx w, cplx ref) {
    auto cands = preimages(c, w);
    cplx best = cands[0];
    for (cplx z : cands)
        if (std::abs(z - ref) < std::abs(best - ref)) best = z;
    return newton_polish_preimage(c, best, w);
}

struct PointItinerary {
    std::vector<int> symbols;
    bool hit_grand_orbit = false;  ///< an iterate reached 0 or infinity
    bool on_boundary = false;      ///< an iterate sits on a critical ray
    bool left_domain = false;      ///< an iterate passed the equipotential of level v
};

inline PointItinerary point_itinerary(const ParamContext& c, cplx z, int depth) {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    PointItinerary out;
    for (int k = 0; k < depth; ++k) {
        if (z == cplx(0, 0) || is_infinite(z)) { out.hit_grand_orbit = true; break; }
        if (std::abs(z) > c.escape_radius) {
            auto g = green_full(c, z);
            if (g.G >= c.green_level_v) { out.left_domain = true; break; }
        }
        auto s = sector_of_point(c, z);
        out.symbols.push_back(s.k);
        if (s.on_boundary) { out.on_boundary = true; break; }
        z = f_eval(c, z);
    }
    return out;
}

struct PeriodicPoint {
    cplx z;
    cplx multiplier;   ///< (f^p)'(z)
    int iterations = 0;
    double contraction = 0;  ///< measured ratio of successive displacements
    double residual = 0;     ///< |f^p(z) - z|
};

/// Fixed point of h_{s0} o ... o h_{s_{p-1}}, then Newton-polished on f^p(z) = z.
inline PeriodicPoint periodic_point(const ParamContext& c, const std::vector<int>& word, double tol = 1e-13,
                                    int budget = 2000) {
    if (word.empty()) throw std::invalid_argument("periodic_point: empty word");
    for (int s : word)
        if (s == 0 || s == c.n || !valid_symbol(s, c.n))
            throw std::invalid_argument("periodic_point: symbols must lie in I minus {0, n}");
    if (!c.in_H) throw domain_error("periodic_point: lambda must lie in H");
    const int p = static_cast<int>(word.size());
    int pos0 = position_of_symbol(word[0], c.n);
    cplx z = std::polar(std::abs(c.c0), c.arg_c0() + (pos0 + 0.5) * kPi / c.n);
    PeriodicPoint out;
    double prev = 0;
    bool converged = false;
    for (int it = 0; it < budget; ++it) {
        cplx y = z;
        for (int j = p - 1; j >= 0; --j) y = inverse_branch(c, word[j], y);
        double d = std::abs(y - z);
        if (prev > 0) out.contraction = d / prev;
        prev = d;
        z = y;
        out.iterations = it + 1;
        if (d < tol * std::max(1.0, std::abs(z))) { converged = true; break; }
    }
    if (!converged) throw numeric_failure("periodic_point: contraction did not converge");
    for (int i = 0; i < 8; ++i) {
        auto [fz, d] = f_iter_deriv(c, z, p);
        cplx r = fz - z;
        if (std::abs(r) < 1e-15) break;
        cplx step = r / (d - 1.0);
        z -= step;
        if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(z))) break;
    }
    auto [fz, d] = f_iter_deriv(c, z, p);
    out.z = z;
    out.multiplier = d;
    out.residual = std::abs(fz - z);
    if (out.residual > 1e-12 * std::max(1.0, std::abs(z)))
        throw numeric_failure("periodic_point: Newton polish failed");
    return out;
}

}  // namespace mcm
