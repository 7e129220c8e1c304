// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "mcm/puzzle.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace mcm;

namespace {

const cplx kLam = std::polar(0.2, kPi / 4);

struct Outcome {
    bool ok = true;
    std::ostringstream why;
    void require(bool cond, const std::string& msg) {
        if (!cond) {
            if (!ok) why << "; ";
            ok = false;
            why << msg;
        }
    }
};

Itinerary per(std::vector<int> w) { return Itinerary::periodic(std::move(w)); }

Outcome c1_round_trip() {
    Outcome o;
    long count = 0;
    for (int n = 3; n <= 5; ++n)
        for (const auto& w : sigma0_words(n, 4)) {
            Angle t = kappa(per(w), n);
            auto cls = angle_itinerary(t, n);
            o.require(cls.in_theta, t.str() + " not in Theta");
            o.require(kappa(cls.itinerary, n) == t, "round trip failed at " + t.str());
            ++count;
        }
    o.why << (o.ok ? "" : "; ") << count << " angles";
    return o;
}

Outcome c2_itineraries() {
    Outcome o;
    auto chk = [&](Angle t, int n, std::vector<int> w) {
        auto s = angle_itinerary(t, n).itinerary;
        o.require(s == per(w), "s(" + t.str() + ") = " + s.str());
    };
    chk(Angle(1, 4), 3, {1, -1});
    chk(Angle(1, 2), 3, {2});
    chk(Angle(1, 3), 4, {2});
    chk(Angle(2, 3), 4, {-1});
    chk(Angle(1, 1), 4, {-3});
    return o;
}

Outcome c3_theta_invariance() {
    Outcome o;
    std::mt19937 rng(2024);
    for (int n = 3; n <= 5; ++n) {
        std::uniform_int_distribution<int> len(1, 6), sym(1, n - 1), sign(0, 1);
        int done = 0;
        while (done < 500) {
            int p = len(rng);
            std::vector<int> w;
            for (int i = 0; i < p; ++i) w.push_back(sign(rng) ? sym(rng) : -sym(rng));
            bool ok = true;
            for (int i = 0; i < p && ok; ++i) ok = sigma0_step(w[i], w[(i + 1) % p], n);
            if (!ok) continue;
            ++done;
            Angle t = kappa(per(w), n);
            o.require(angle_itinerary(t, n).in_theta, "sample outside Theta");
            o.require(angle_itinerary(tau(t, n), n).in_theta, "tau(" + t.str() + ") outside Theta");
            o.require(angle_itinerary(t.shifted(1, 2), n).in_theta, t.str() + " + 1/2 outside Theta");
            auto s = angle_itinerary(t, n).itinerary;
            for (std::size_t k = 1; k <= 8; ++k) {
                Angle a = periodic_approximant(s, n, k);
                bigint num = a.num() * t.den() - t.num() * a.den();
                if (num < 0) num = -num;
                bigint den = a.den() * t.den();
                bigint wrap = den - num;
                bigint d = num < wrap ? num : wrap;
                o.require(d * detail::ipow(n, k) <= den, "approximant bound fails at " + t.str());
            }
        }
    }
    return o;
}

Outcome c4_intersections() {
    Outcome o;
    auto c = ParamContext::make(kLam, 3);
    struct Pair {
        Angle a, b;
        long expect;
    };
    for (auto [a, b, expect] : {Pair{Angle(1, 4), Angle(1, 2), 2},
                                Pair{kappa(Itinerary::parse("1,-2|-1,1"), 3), Angle(1, 4), 4},
                                Pair{kappa(Itinerary::parse("2,2,1,-1|2"), 3), Angle(1, 2), 8}}) {
        auto r = intersection_count(c, a, b, -1, 1e-6);
        o.require(r.predicted == expect, a.str() + "," + b.str() + ": predicted " + std::to_string(r.predicted));
        o.require(r.located == expect, a.str() + "," + b.str() + ": located " + std::to_string(r.located));
        o.require(r.matched, a.str() + "," + b.str() + ": symbolic points off by " + std::to_string(r.max_match_error));
    }
    return o;
}

Outcome c5_periodic_points() {
    Outcome o;
    auto c = ParamContext::make(kLam, 3);
    const std::vector<int> syms{1, 2, -1, -2};
    long count = 0;
    std::function<void(std::vector<int>&, int)> rec = [&](std::vector<int>& w, int p) {
        if (int(w.size()) == p) {
            auto pp = periodic_point(c, w);
            o.require(pp.residual < 1e-10, "residual " + std::to_string(pp.residual));
            o.require(std::abs(pp.multiplier) > 1, "not repelling");
            ++count;
            return;
        }
        for (int s : syms) {
            w.push_back(s);
            rec(w, p);
            w.pop_back();
        }
    };
    for (int p = 1; p <= 3; ++p) {
        std::vector<int> w;
        rec(w, p);
    }
    o.why << (o.ok ? "" : "; ") << count << " words";
    return o;
}

Outcome c6_real_landing() {
    Outcome o;
    auto c = ParamContext::make(0.1, 3);
    auto ray = trace_external_ray(c, Angle(1, 1));
    auto p = refine_periodic_landing(c, ray);
    double beta = p.z.real();
    o.require(std::abs(p.z.imag()) < 1e-12 && beta > 0, "landing point off R+");
    o.require(std::abs(f_eval(c, p.z) - p.z) < 1e-8, "not a fixed point");
    auto bt = boundary_trace(c, Window{-1.5, 1.5, -1.5, 1.5}, 512);
    const double tol = 3 * bt.pixel;
    o.require(bt.real_crossings.size() == 2, std::to_string(bt.real_crossings.size()) + " real crossings");
    if (bt.real_crossings.size() == 2) {
        o.require(std::abs(bt.real_crossings[0] + beta) < tol, "left crossing " + std::to_string(bt.real_crossings[0]));
        o.require(std::abs(bt.real_crossings[1] - beta) < tol, "right crossing " + std::to_string(bt.real_crossings[1]));
    }
    o.require(std::abs(bt.beta - beta) < 1e-6, "walk ends at " + std::to_string(bt.beta));
    o.why << (o.ok ? "" : "; ") << "beta=" << beta;
    return o;
}

Outcome c7_trichotomy() {
    Outcome o;
    o.require(classify_escape(ParamContext::make(10.0, 3)).tag == EscapeTag::CantorSet, "lambda=10");
    o.require(classify_escape(ParamContext::make(1e-4, 3)).tag == EscapeTag::CantorCircles, "lambda=1e-4");
    // 1-D scan along arg lambda = pi/2
    std::optional<cplx> sier, conn;
    for (int k = 1; k <= 400 && !(sier && conn); ++k) {
        cplx lam(0, 0.5 * k / 400);
        auto e = classify_escape(ParamContext::make(lam, 3));
        if (!sier && e.tag == EscapeTag::Sierpinski && e.first_escape_iterate && *e.first_escape_iterate >= 1) sier = lam;
        if (!conn && e.tag == EscapeTag::Connected) conn = lam;
    }
    o.require(bool(sier), "no Sierpinski parameter on the scan");
    o.require(bool(conn), "no bounded-orbit parameter on the scan");
    auto s = survey_parameter_plane(3, Window{-1, 1, -1, 1}, 64, 64, 256);
    o.require(s.conjugation_mismatches == 0, std::to_string(s.conjugation_mismatches) + " conjugation mismatches");
    if (sier) o.why << (o.ok ? "" : "; ") << "Sierpinski at " << sier->imag() << "i";
    if (conn) o.why << ", Connected at " << conn->imag() << "i";
    return o;
}

Outcome c8_symmetry() {
    Outcome o;
    auto c = ParamContext::make(kLam, 3);
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(-3, 3);
    int done = 0;
    double worst = 0;
    while (done < 100) {
        cplx z(u(rng), u(rng));
        if (std::abs(z) < c.escape_radius || std::abs(z) > 3) {
            if (green(c, z).status != EscapeStatus::Escaping || std::abs(z) < 0.1) continue;
        }
        double G = green(c, z).value;
        bool phi_ok = std::abs(z) >= c.escape_radius;
        cplx p = phi_ok ? bottcher(c, z) : cplx(0);
        for (int k = 0; k < 6; ++k) {
            cplx om = std::polar(1.0, k * kPi / 3);
            worst = std::max(worst, std::abs(green(c, om * z).value - G) / G);
            if (phi_ok) worst = std::max(worst, std::abs(bottcher(c, om * z) - om * p) / std::abs(p));
        }
        ++done;
    }
    o.require(worst < 1e-8, "relative error " + std::to_string(worst));
    PuzzleRaster r(c, build_graph(c, {Angle(1, 4), Angle(1, 2)}), Window{-3, 3, -3, 3}, 512, 512, 1);
    auto rc = rotation_permutation(r, 1, 2.5);
    o.require(rc.bijective, "depth-1 rotation map not bijective");
    o.why << (o.ok ? "" : "; ") << "max rel err " << worst << ", " << rc.permutation.size() << " pieces permuted";
    return o;
}

Outcome c9_cut_ray_blobs() {
    Outcome o;
    auto c = ParamContext::make(kLam, 3);
    for (int m = 0; m <= 3; ++m) {
        auto a = trace_cut_ray_boundary(c, Angle(1, 2), m, Window{-3, 3, -3, 3}, 1024, 1024);
        o.require(a.blob_count == (1 << (m + 1)), "m=" + std::to_string(m) + ": " + std::to_string(a.blob_count) + " blobs");
        o.why << (o.why.tellp() > 0 ? " " : "") << a.blob_count;
    }
    auto code = CutRayCode::of(Angle(1, 2), 3);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-3, 3);
    long bad = 0;
    for (int i = 0; i < 10000; ++i) {
        cplx z(u(rng), u(rng));
        for (int m = 0; m < 6; ++m)
            if (cut_ray_membership(c, code, m + 1, z) && !cut_ray_membership(c, code, m, z)) ++bad;
    }
    o.require(bad == 0, std::to_string(bad) + " nesting violations");
    return o;
}

Outcome c10_admissible() {
    Outcome o;
    auto c = ParamContext::make(kLam, 3);
    const double l0 = c.arg_c0();
    AdmissibleOptions opt;
    opt.witness = false;
    std::set<std::string> regions;
    for (cplx v : {std::polar(0.01, l0 + kPi / 6), std::polar(1.0, l0 + kPi / 3 * 4 / 24),
                   std::polar(2.0, l0 + kPi / 3 * 14 / 24), std::polar(1.0, l0 + kPi / 3 * 22 / 24)}) {
        opt.vplus_override = &v;
        auto r = admissible_graph_search(c, opt);
        o.require(r.found, "no graph for a synthetic placement");
        regions.insert(r.region);
    }
    o.require(regions == std::set<std::string>{"D1", "D2", "D3", "D4"}, "regions hit: " + std::to_string(regions.size()));
    opt.vplus_override = nullptr;
    std::vector<cplx> t2{periodic_point(c, {2}).z}, t4{periodic_point(c, {1, -1}).z};
    opt.orbit_override = &t2;
    o.require(admissible_graph_search(c, opt).graph == std::vector<Angle>{Angle(1, 4)}, "1/2 touchable branch");
    opt.orbit_override = &t4;
    o.require(admissible_graph_search(c, opt).graph == std::vector<Angle>{Angle(1, 2)}, "1/4 touchable branch");

    auto c4 = ParamContext::make(std::polar(0.1, kPi / 6), 4);
    std::vector<cplx> o4{periodic_point(c4, {2}).z}, free{cplx(0.3, 0.9)};
    opt.orbit_override = &o4;
    o.require(admissible_graph_search(c4, opt).graph == std::vector<Angle>{Angle(2, 3), Angle(1, 1)}, "n=4 touchable branch");
    opt.orbit_override = &free;
    o.require(admissible_graph_search(c4, opt).graph == std::vector<Angle>{Angle(1, 3)}, "n=4 untouchable branch");

    auto c5 = ParamContext::make(cplx(0.1710580255, 0.0254396617), 5);
    o.require(escape_time(c5, c5.vplus, 1000) < 0, "n=5 parameter does not have a bounded critical orbit");
    AdmissibleOptions w5;
    w5.window = {-1.6, 1.6, -1.6, 1.6};
    w5.resolution = 768;
    w5.max_depth = 3;
    auto r5 = admissible_graph_search(c5, w5);
    o.require(r5.found && r5.witness_depth >= 1 && r5.witness_px > 0, "n=5: no annulus witness");
    if (r5.found) o.why << (o.ok ? "" : "; ") << "n=5 graph " << r5.graph.front().str() << ", A_" << r5.witness_depth << " " << r5.witness_px << " px";
    return o;
}

/// Parameter near `guess` where the critical value v+ maps onto critical point c_k.
cplx center_search(cplx guess, int k) {
    auto F = [&](cplx lam) {
        auto c = ParamContext::make(lam, 3);
        return f_eval(c, c.vplus) - c.critical_points[k];
    };
    cplx lam = guess;
    for (int it = 0; it < 60; ++it) {
        cplx h = 1e-7 * std::max(1.0, std::abs(lam));
        cplx d = (F(lam + h) - F(lam - h)) / (2.0 * h);
        cplx step = F(lam) / d;
        lam -= step;
        if (std::abs(step) < 1e-15) break;
    }
    return lam;
}

Outcome c11_tableau() {
    Outcome o;
    // oracle: a bounded-orbit pixel of a coarse survey near the imaginary axis, refined to a center
    auto s = survey_parameter_plane(3, Window{-0.004, 0.004, 0.245, 0.26}, 16, 16, 256);
    std::optional<cplx> seed;
    double best = 1e300;
    for (int j = 0; j < s.height; ++j)
        for (int i = 0; i < s.width; ++i)
            if (s.at(i, j) == EscapeTag::Connected) {
                cplx z = s.window.at(i, j, s.width, s.height);
                if (std::abs(z.real()) < best) { best = std::abs(z.real()); seed = z; }
            }
    o.require(bool(seed), "survey found no bounded-orbit pixel");
    if (!seed) return o;
    cplx lam = center_search(*seed, 2);
    auto c = ParamContext::make(lam, 3);
    o.require(c.in_H && classify_escape(c).tag == EscapeTag::Connected, "searched center is not a bounded-orbit parameter in H");
    PuzzleRaster r(c, build_graph(c, {Angle(1, 4), Angle(1, 2)}), Window{-1.5, 1.5, -1.5, 1.5}, 768, 768, 6);
    auto tabs = build_tableaux(r, 64);
    long t2 = 0, t2bad = 0;
    for (const auto& t : tabs) {
        o.require(t.t1_ok, "T1 fails for c" + std::to_string(t.critical));
        t2 += t.t2_checks;
        t2bad += t.t2_violations;
    }
    o.require(t2 > 0 && t2bad == 0, std::to_string(t2bad) + "/" + std::to_string(t2) + " T2 violations");
    auto rep = detect_renormalization(r, tabs);
    o.require(rep.renormalizable, "detector: " + rep.note);
    o.require(rep.period >= 1 && rep.orbit_consistent, "period-inconsistent report");
    for (double x : {0.1, 0.05}) {
        auto rr = real_renormalization(ParamContext::make(x, 3));
        o.require(rr && rr->renormalizable && rr->period == 1 && rr->epsilon == 1 && rr->orbit_consistent,
                  "real lambda " + std::to_string(x) + " not 1-renormalizable");
    }
    o.why << (o.ok ? "" : "; ") << "lambda=" << lam.real() << (lam.imag() < 0 ? "" : "+") << lam.imag() << "i eps=" << rep.epsilon
          << " p=" << rep.period << " d0=" << rep.d0 << " annulus " << rep.annulus_px << " px";
    return o;
}

Outcome c12_regularity() {
    Outcome o;
    std::vector<cplx> circle{{2, 0}, {0, 2}, {-2, 0}, {0, -2}};
    o.require(shape(circle, 0.0) == 1.0, "Shape(circle) != 1");
    std::vector<cplx> seg{{0, 0}, {0.25, 0}, {0.5, 0}, {1, 0}};
    o.require(turning(seg) == 1.0, "turning(segment) != 1");
    auto c = ParamContext::make(1e-4, 3);
    Window win{-1.5, 1.5, -1.5, 1.5};
    auto a = shape_and_turning(boundary_trace(c, win, 256).loop, 0.0);
    auto b = shape_and_turning(boundary_trace(c, win, 512).loop, 0.0);
    double rel = std::abs(a.max_turning - b.max_turning) / b.max_turning;
    o.require(rel < 0.1, "turning changed by " + std::to_string(rel));
    o.why << (o.ok ? "" : "; ") << "turning " << a.max_turning << " -> " << b.max_turning;
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
        {"symbolic round trip", c1_round_trip},
        {"graph itineraries", c2_itineraries},
        {"Theta invariances", c3_theta_invariance},
        {"intersection counting", c4_intersections},
        {"repelling periodic points", c5_periodic_points},
        {"ray landing, real case", c6_real_landing},
        {"escape trichotomy map", c7_trichotomy},
        {"symmetry suites", c8_symmetry},
        {"cut-ray approximants", c9_cut_ray_blobs},
        {"admissible graphs", c10_admissible},
        {"tableau rules, renormalization", c11_tableau},
        {"regularity diagnostics", c12_regularity},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r.ok = false;
            r.why << "exception: " << e.what();
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2zu %s (%.1fs) %s\n", r.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, sec, r.why.str().c_str());
        std::fflush(stdout);
        failed += !r.ok;
    }
    return failed ? 1 : 0;
}
