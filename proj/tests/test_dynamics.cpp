#include "catch_amalgamated.hpp"

#include "mcm/classify.hpp"
#include "mcm/dynamics.hpp"

#include <random>

using namespace mcm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const cplx kLam = std::polar(0.2, kPi / 4);

std::vector<cplx> escaping_samples(const ParamContext& c, int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-3, 3);
    std::vector<cplx> out;
    while (int(out.size()) < count) {
        cplx z(u(rng), u(rng));
        if (green_full(c, z).status == EscapeStatus::Escaping && std::abs(z) > 0.05) out.push_back(z);
    }
    return out;
}

}  // namespace

TEST_CASE("context constants") {
    auto c = ParamContext::make(1.0, 3);
    CHECK(c.c0 == cplx(1, 0));
    CHECK_THAT(c.vplus.real(), WithinAbs(2, 1e-15));
    CHECK(c.escape_radius >= 2);
    auto h = ParamContext::make(kLam, 3);
    CHECK(h.in_H);
    CHECK_THAT(h.arg_c0(), WithinAbs(kPi / 24, 1e-15));
    CHECK_THAT(std::arg(h.vplus), WithinAbs(kPi / 8, 1e-15));
    CHECK_FALSE(ParamContext::make(0.1, 3).in_H);
    CHECK_THROWS_AS(ParamContext::make(0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(ParamContext::make(1.0, 2), std::invalid_argument);
    // escape radius doubles |z|
    for (double lam : {1e-4, 0.2, 10.0, 1e3}) {
        auto e = ParamContext::make(lam, 3);
        double R = e.escape_radius;
        CHECK(std::pow(R, 3) - lam / std::pow(R, 3) >= 2 * R);
    }
}

TEST_CASE("evaluation examples") {
    auto c = ParamContext::make(1.0, 3);
    CHECK(f_eval(c, 1.0) == cplx(2, 0));
    auto d = ParamContext::make(0.1, 3);
    cplx w = f_eval(d, cplx(0, 1));
    CHECK_THAT(w.real(), WithinAbs(0, 1e-15));
    CHECK_THAT(w.imag(), WithinAbs(-0.9, 1e-15));
    auto h = ParamContext::make(kLam, 3);
    for (int k = 0; k < 6; ++k) {
        cplx v = f_eval(h, h.critical_points[k]);
        CHECK(std::abs(v - (k % 2 == 0 ? h.vplus : h.vminus)) < 1e-14);
        CHECK(std::abs(f_deriv(h, h.critical_points[k])) < 1e-13);
    }
}

TEST_CASE("Green function") {
    auto c = ParamContext::make(1.0, 3);
    cplx z = std::polar(1e6, 0.3);
    auto g = green(c, z);
    REQUIRE(g.status == EscapeStatus::Escaping);
    CHECK_THAT(g.value, WithinRel(std::log(1e6), 1e-6));
    auto h = ParamContext::make(kLam, 3);
    for (cplx s : escaping_samples(h, 100, 1)) {
        double G = green(h, s).value;
        CHECK_THAT(green(h, f_eval(h, s)).value, WithinRel(3 * G, 1e-9));
        for (int k = 0; k < 6; ++k) {
            cplx om = std::polar(1.0, k * kPi / 3);
            CHECK_THAT(green(h, om * s).value, WithinRel(G, 1e-8));
        }
    }
        auto b = ParamContext::make(cplx(0, 0.2572713784), 3);
    CHECK(green(b, b.c0).status == EscapeStatus::NotEscaping);
}

TEST_CASE("Boettcher coordinate") {
    auto c = ParamContext::make(1.0, 3);
    cplx z = std::polar(1e8, 1.1);
    CHECK(std::abs(bottcher(c, z) / z - 1.0) < 1e-7);
    auto h = ParamContext::make(kLam, 3);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> a(0, 2 * kPi), r(2.5, 6);
    for (int i = 0; i < 100; ++i) {
        cplx y = std::polar(r(rng), a(rng));
        cplx p = bottcher(h, y);
        CHECK_THAT(std::abs(p), WithinRel(std::exp(green(h, y).value), 1e-10));
        for (int k = 0; k < 6; ++k) {
            cplx om = std::polar(1.0, k * kPi / 3);
            CHECK(std::abs(bottcher(h, om * y) - om * p) < 1e-8 * std::abs(p));
        }
    }
    CHECK_THROWS_AS(bottcher(h, 0.0), domain_error);
}

TEST_CASE("sectors") {
    auto c = ParamContext::make(0.1, 3);
    CHECK(sector_of_point(c, c.vplus).k == 0);
    CHECK(sector_of_point(c, c.vminus).k == 3);
    auto h = ParamContext::make(kLam, 3);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 500; ++i) {
        cplx z(u(rng), u(rng));
        auto s = sector_of_point(h, z);
        if (s.on_boundary || s.k == 0 || s.k == 3) continue;
        CHECK(sector_of_point(h, -z).k == -s.k);
    }
    // on a critical ray the counterclockwise sector wins
    auto b = sector_of_point(h, h.critical_points[1] * 2.0);
    CHECK(b.on_boundary);
    CHECK(b.position == 1);
}

TEST_CASE("inverse branches") {
    auto h = ParamContext::make(kLam, 3);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 200; ++i) {
        cplx w(u(rng), u(rng));
        if (critical_value_ray_distance(h, w) < 1e-3) continue;
        for (int k : {1, 2, -1, -2}) {
            cplx z = inverse_branch(h, k, w);
            CHECK(std::abs(f_eval(h, z) - w) < 1e-10 * std::max(1.0, std::abs(w)));
            CHECK(sector_of_point(h, z).k == k);
            CHECK(std::abs(inverse_branch(h, -k, -w) + z) < 1e-10);
        }
        auto pre = preimages(h, w);
        REQUIRE(pre.size() == 6);
        for (std::size_t a = 0; a < pre.size(); ++a) {
            cplx z = newton_polish_preimage(h, pre[a], w);
            CHECK(std::abs(f_eval(h, z) - w) < 1e-9 * std::max(1.0, std::abs(w)));
            for (std::size_t b = 0; b < a; ++b) CHECK(std::abs(pre[a] - pre[b]) > 1e-9);
        }
    }
    CHECK_THROWS_AS(inverse_branch(h, 1, h.vplus * 2.0), branch_cut_error);
    CHECK_THROWS_AS(inverse_branch(h, 5, 1.0), std::invalid_argument);
}

TEST_CASE("rotation symmetry of the dynamics") {
    auto h = ParamContext::make(kLam, 3);
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 200; ++i) {
        cplx z(u(rng), u(rng));
        for (int k = 0; k < 6; ++k) {
            cplx om = std::polar(1.0, k * kPi / 3);
            cplx a = f_eval(h, om * z), b = f_eval(h, z);
            CHECK(std::min(std::abs(a - b), std::abs(a + b)) < 1e-9 * std::max(1.0, std::abs(b)));
            CHECK(escape_time(h, om * z, 24) == escape_time(h, z, 24));
        }
    }
}

TEST_CASE("periodic points are repelling and round-trip their itineraries") {
    auto h = ParamContext::make(kLam, 3);
    const std::vector<int> syms{1, 2, -1, -2};
    std::vector<cplx> found;
    std::vector<std::vector<int>> words;
    for (int p = 1; p <= 3; ++p) {
        std::vector<int> idx(p, 0);
        while (true) {
            std::vector<int> w;
            for (int i : idx) w.push_back(syms[i]);
            words.push_back(w);
            int i = p - 1;
            while (i >= 0 && ++idx[i] == int(syms.size())) idx[i--] = 0;
            if (i < 0) break;
        }
    }
    for (const auto& w : words) {
        auto pp = periodic_point(h, w);
        CHECK(pp.residual < 1e-10);
        CHECK(std::abs(pp.multiplier) > 1);
        auto it = point_itinerary(h, pp.z, 9);
        REQUIRE(it.symbols.size() == 9);
        for (int k = 0; k < 9; ++k) CHECK(it.symbols[k] == w[k % w.size()]);
        std::vector<int> neg;
        for (int s : w) neg.push_back(-s);
        CHECK(std::abs(periodic_point(h, neg).z + pp.z) < 1e-10);
        // primitive words give distinct points
        bool primitive = true;
        for (std::size_t q = 1; q < w.size(); ++q)
            if (w.size() % q == 0 && std::equal(w.begin() + q, w.end(), w.begin())) primitive = false;
        if (primitive) found.push_back(pp.z);
    }
    for (std::size_t a = 0; a < found.size(); ++a)
        for (std::size_t b = 0; b < a; ++b) CHECK(std::abs(found[a] - found[b]) > 1e-8);
    CHECK_THROWS_AS(periodic_point(h, {0}), std::invalid_argument);
    CHECK_THROWS_AS(periodic_point(ParamContext::make(0.1, 3), {2}), domain_error);
}

TEST_CASE("point itineraries shift under f") {
    auto h = ParamContext::make(kLam, 3);
    auto z = periodic_point(h, {2, 1, -1}).z * (1 + 1e-7);
    auto a = point_itinerary(h, z, 6), b = point_itinerary(h, f_eval(h, z), 5);
    REQUIRE(a.symbols.size() >= 6);
    REQUIRE(b.symbols.size() >= 5);
    for (int k = 0; k < 5; ++k) CHECK(b.symbols[k] == a.symbols[k + 1]);
}

TEST_CASE("Escape Trichotomy samples") {
    CHECK(classify_escape(ParamContext::make(10.0, 3)).tag == EscapeTag::CantorSet);
    auto cc = classify_escape(ParamContext::make(1e-4, 3));
    CHECK(cc.tag == EscapeTag::CantorCircles);
    auto s = classify_escape(ParamContext::make(kLam, 3));
    CHECK(s.tag == EscapeTag::Sierpinski);
    REQUIRE(s.first_escape_iterate);
    CHECK(*s.first_escape_iterate >= 1);
    CHECK(classify_escape(ParamContext::make(cplx(0, 0.2572713784), 3)).tag == EscapeTag::Connected);
    CHECK_THROWS_AS(classify_escape(ParamContext::make(1.0, 3), 0), std::invalid_argument);
}

TEST_CASE("certificates respect the disks") {
    auto h = ParamContext::make(kLam, 3);
    CertifyOptions o;
    // a certified basin disk around a point outside the escape radius contains only escaping points
    cplx y(2.5, 0.4);
    double r = basin_disk(h, y, o);
    REQUIRE(r > 0);
    for (int k = 0; k < 16; ++k) CHECK(escape_time(h, y + std::polar(0.99 * r, k * kPi / 8), 200) >= 0);
    CHECK(certify_in_basin(h, cplx(3, 3)).ok);
    CHECK_FALSE(certify_in_basin(h, h.c0).ok);
    CHECK(certify_in_trap(h, 1e-3 * h.c0).ok);
}

TEST_CASE("survey symmetry") {
    auto s = survey_parameter_plane(3, Window{-1, 1, -1, 1}, 24, 24, 128, 1, true, 64);
    CHECK(s.conjugation_mismatches == 0);
    CHECK(s.rotation_mismatches >= 0);
    long indeterminate = 0;
    for (auto t : s.tags) indeterminate += t == EscapeTag::Indeterminate;
    CHECK(indeterminate == 0);
    // the McMullen disk around 0
    auto z = survey_parameter_plane(3, Window{-0.01, 0.01, -0.01, 0.01}, 8, 8, 128);
    for (auto t : z.tags) CHECK(t == EscapeTag::CantorCircles);
}
