#pragma once

// Exact symbolic dynamics on angles in (0,1] under t -> n t mod 1.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcm {

using bigint = boost::multiprecision::cpp_int;

struct invalid_symbol : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct invalid_itinerary : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct same_cut_ray : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct unsupported_degree : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A rational point of the circle, normalized into (0,1]; the point 0 is stored as 1.
class Angle {
public:
    Angle() : p_(1), q_(1) {}
    Angle(bigint p, bigint q) { assign(std::move(p), std::move(q)); }
    Angle(long long p, long long q) { assign(bigint(p), bigint(q)); }

    static Angle parse(const std::string& s) {
        auto slash = s.find('/');
        try {
            if (slash == std::string::npos) return Angle(bigint(s), bigint(1));
            return Angle(bigint(s.substr(0, slash)), bigint(s.substr(slash + 1)));
        } catch (const std::runtime_error&) {
            throw std::invalid_argument("bad angle '" + s + "'");
        }
    }

    const bigint& num() const { return p_; }
    const bigint& den() const { return q_; }

    double to_double() const {
        return static_cast<double>(p_.convert_to<long double>() / q_.convert_to<long double>());
    }

    std::string str() const { return p_.str() + "/" + q_.str(); }

    /// Translate by a/b (mod 1).
    Angle shifted(long long a, long long b) const { return Angle(p_ * b + q_ * a, q_ * b); }

    friend bool operator==(const Angle& a, const Angle& b) { return a.p_ == b.p_ && a.q_ == b.q_; }
    friend bool operator!=(const Angle& a, const Angle& b) { return !(a == b); }
    friend bool operator<(const Angle& a, const Angle& b) { return a.p_ * b.q_ < b.p_ * a.q_; }

private:
    void assign(bigint p, bigint q) {
        if (q == 0) throw std::invalid_argument("zero denominator");
        if (q < 0) { p = -p; q = -q; }
        p %= q;
        if (p <= 0) p += q;
        bigint g = boost::multiprecision::gcd(p, q);
        p_ = p / g;
        q_ = q / g;
    }
    bigint p_, q_;
};

inline bool valid_symbol(int k, int n) { return n >= 1 && -(n - 1) <= k && k <= n; }

/// chi(k) = k for 0 <= k <= n, n - k for negative k.
inline int chi(int k, int n) {
    if (!valid_symbol(k, n)) throw invalid_symbol("symbol " + std::to_string(k) + " not in I for n=" + std::to_string(n));
    return k >= 0 ? k : n - k;
}

/// Inverse of chi: position 0..2n-1 in counterclockwise order to the symbol.
inline int symbol_of_position(int pos, int n) { return pos <= n ? pos : n - pos; }

inline Angle tau(const Angle& t, int n) { return Angle(t.num() * n, t.den()); }

/// The k with theta in Theta_k = (chi(k)/2n, (chi(k)+1)/2n].
inline int sector_of_angle(const Angle& t, int n) {
    bigint m = 2 * n * t.num();
    bigint c = m / t.den();
    if (c * t.den() != m) c += 1;  // ceiling
    int pos = static_cast<int>(c) - 1;
    return symbol_of_position(pos, n);
}

inline bool coding_symbol(int k, int n) { return valid_symbol(k, n) && k != 0 && k != n; }

/// Eventually periodic symbol sequence pre + (per)^infinity.
struct Itinerary {
    std::vector<int> pre;
    std::vector<int> per;
    bool truncated = false;

    std::size_t prefix_length() const { return pre.size() + per.size(); }

    int at(std::size_t k) const {
        if (k < pre.size()) return pre[k];
        if (per.empty()) throw std::out_of_range("finite itinerary");
        return per[(k - pre.size()) % per.size()];
    }

    std::vector<int> prefix(std::size_t len) const {
        std::vector<int> out;
        for (std::size_t k = 0; k < len; ++k) out.push_back(at(k));
        return out;
    }

    bool coding(int n) const {
        for (int s : pre) if (!coding_symbol(s, n)) return false;
        for (int s : per) if (!coding_symbol(s, n)) return false;
        return true;
    }

    static std::string join(const std::vector<int>& v) {
        std::string r;
        for (std::size_t i = 0; i < v.size(); ++i) r += (i ? "," : "") + std::to_string(v[i]);
        return r;
    }

    std::string str() const { return join(pre) + "|" + join(per); }

    static Itinerary parse(const std::string& s) {
        auto split = [](const std::string& x) {
            std::vector<int> v;
            std::stringstream ss(x);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (tok.empty()) continue;
                std::size_t used = 0;
                int k = std::stoi(tok, &used);
                if (used != tok.size()) throw std::invalid_argument("bad symbol '" + tok + "'");
                v.push_back(k);
            }
            return v;
        };
        Itinerary it;
        auto bar = s.find('|');
        if (bar == std::string::npos) {
            it.pre = split(s);
            it.truncated = true;
        } else {
            it.pre = split(s.substr(0, bar));
            it.per = split(s.substr(bar + 1));
        }
        return it;
    }

    static Itinerary periodic(std::vector<int> word) { return Itinerary{{}, std::move(word), false}; }

    friend bool operator==(const Itinerary& a, const Itinerary& b) {
        return a.pre == b.pre && a.per == b.per && a.truncated == b.truncated;
    }
};

/// Parity rule of Sigma_0: chi(a) even forces b > 0, chi(a) odd forces b < 0.
inline bool sigma0_step(int a, int b, int n) { return (chi(a, n) % 2 == 0) ? b > 0 : b < 0; }

inline bool in_sigma0(const Itinerary& s, int n) {
    if (!s.coding(n) || s.per.empty()) return false;
    std::size_t len = s.prefix_length();
    for (std::size_t k = 0; k < len; ++k)
        if (!sigma0_step(s.at(k), s.at(k + 1), n)) return false;
    return true;
}

struct AngleClass {
    Angle theta;
    Itinerary itinerary;
    bool in_theta = false;
    int offending = -1;  ///< first index with symbol 0 or n, -1 if none
};

/// Itinerary of theta with exact cycle detection on the rational orbit.
inline AngleClass angle_itinerary(const Angle& theta, int n, int depth = 64) {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    AngleClass out;
    out.theta = theta;
    std::map<Angle, int> seen;
    std::vector<int> syms;
    Angle t = theta;
    std::optional<int> cycle_start;
    for (int k = 0; k < depth; ++k) {
        auto [it, fresh] = seen.emplace(t, k);
        if (!fresh) { cycle_start = it->second; break; }
        syms.push_back(sector_of_angle(t, n));
        t = tau(t, n);
    }
    if (!cycle_start) {
        auto it = seen.find(t);
        if (it != seen.end()) cycle_start = it->second;
    }
    if (cycle_start) {
        out.itinerary.pre.assign(syms.begin(), syms.begin() + *cycle_start);
        out.itinerary.per.assign(syms.begin() + *cycle_start, syms.end());
    } else {
        out.itinerary.pre = syms;
        out.itinerary.truncated = true;
    }
    for (std::size_t k = 0; k < syms.size(); ++k)
        if (!coding_symbol(syms[k], n)) { out.offending = static_cast<int>(k); break; }
    out.in_theta = out.offending < 0;
    return out;
}

namespace detail {
inline bigint ipow(long long b, std::size_t e) {
    bigint r = 1;
    for (std::size_t i = 0; i < e; ++i) r *= b;
    return r;
}
}  // namespace detail

/// kappa(s) = (chi(s0)/n + sum_{k>=1} |s_k| / n^{k+1}) / 2, summed in closed form.
inline Angle kappa(const Itinerary& s, int n) {
    if (s.per.empty()) throw invalid_itinerary("kappa needs a periodic tail");
    if (!s.coding(n)) throw invalid_itinerary("itinerary uses symbol 0 or n");
    const std::size_t L = s.pre.size(), p = s.per.size();
    // Value = N / D with D = 2 n^{L+p+1} (n^p - 1).
    const bigint np = detail::ipow(n, p);
    const bigint top = detail::ipow(n, L + p + 1);
    bigint num = bigint(chi(s.at(0), n)) * (top / n) * (np - 1);
    for (std::size_t k = 1; k < L; ++k) num += bigint(std::abs(s.at(k))) * (top / detail::ipow(n, k + 1)) * (np - 1);
    // periodic tail k >= max(L,1): block over one period times n^p/(n^p-1)
    bigint block = 0;
    std::size_t first = std::max<std::size_t>(L, 1);
    for (std::size_t k = first; k < first + p; ++k) block += bigint(std::abs(s.at(k))) * (top / detail::ipow(n, k + 1));
    num += block * np;
    return Angle(num, 2 * top * (np - 1));
}

/// J(alpha, beta): first k with |s_k(alpha)| != |s_k(beta)|.
inline int first_divergence(const Itinerary& a, const Itinerary& b) {
    if (a.per.empty() || b.per.empty()) throw invalid_itinerary("first_divergence needs periodic tails");
    std::size_t pa = a.per.size(), pb = b.per.size();
    std::size_t horizon = std::max(a.pre.size(), b.pre.size()) + pa * pb / std::gcd(pa, pb);
    for (std::size_t k = 0; k < horizon; ++k)
        if (std::abs(a.at(k)) != std::abs(b.at(k))) return static_cast<int>(k);
    throw same_cut_ray("angles share their modulus sequence");
}

inline int first_divergence(const Angle& a, const Angle& b, int n) {
    auto ia = angle_itinerary(a, n, 1 << 20), ib = angle_itinerary(b, n, 1 << 20);
    return first_divergence(ia.itinerary, ib.itinerary);
}

/// All Sigma_0-compatible periodic words of length <= max_period whose symbol moduli lie in
/// [lo, hi], in lexicographic order on (length, word).
inline std::vector<std::vector<int>> sigma0_words(int n, int max_period, int lo = 1, int hi = -1) {
    if (hi < 0) hi = n - 1;
    std::vector<int> alphabet;
    for (int k = -hi; k <= -lo; ++k) alphabet.push_back(k);
    for (int k = lo; k <= hi; ++k) alphabet.push_back(k);
    std::vector<std::vector<int>> out;
    for (int p = 1; p <= max_period; ++p) {
        std::vector<int> w(p, 0);
        std::vector<std::size_t> idx(p, 0);
        while (true) {
            for (int i = 0; i < p; ++i) w[i] = alphabet[idx[i]];
            bool ok = true;
            for (int i = 0; i < p && ok; ++i) ok = sigma0_step(w[i], w[(i + 1) % p], n);
            if (ok) out.push_back(w);
            int i = p - 1;
            while (i >= 0 && ++idx[i] == alphabet.size()) idx[i--] = 0;
            if (i < 0) break;
        }
    }
    return out;
}

/// The angle set used for admissible graphs; for n >= 5 the periodic angles built from
/// symbols in {+-2, ..., +-(n-2)} up to the given period bound (duplicates removed).
inline std::vector<Angle> theta_ad(int n, int max_period = 1) {
    if (n < 3) throw unsupported_degree("n must be >= 3");
    if (n == 3) return {Angle(1, 4), Angle(1, 2)};
    if (n == 4) return {Angle(1, 3), Angle(2, 3), Angle(1, 1)};
    std::vector<Angle> out;
    for (const auto& w : sigma0_words(n, max_period, 2, n - 2)) {
        Angle a = kappa(Itinerary::periodic(w), n);
        if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    }
    return out;
}

/// Periodic approximant obtained by closing the first k+1 symbols of s (adding one
/// parity-fixing symbol when the wrap-around breaks the Sigma_0 rule).
inline Angle periodic_approximant(const Itinerary& s, int n, std::size_t k) {
    std::vector<int> w = s.prefix(k + 1);
    if (!sigma0_step(w.back(), w.front(), n)) {
        int sign = (chi(w.back(), n) % 2 == 0) ? 1 : -1;
        int want_parity = w.front() > 0 ? 0 : 1;
        for (int m = 1; m <= n - 1; ++m) {
            int cand = sign * m;
            if (chi(cand, n) % 2 == want_parity) { w.push_back(cand); break; }
        }
    }
    return kappa(Itinerary::periodic(w), n);
}

}  // namespace mcm
