#include "catch_amalgamated.hpp"

#include "mcm/rays.hpp"

#include <random>

using namespace mcm;

namespace {

const cplx kLam = std::polar(0.2, kPi / 4);

}  // namespace

TEST_CASE("angle orbits and periods") {
    CHECK(angle_period(Angle(1, 4), 3) == 2);
    CHECK(angle_period(Angle(1, 2), 3) == 1);
    CHECK(angle_period(Angle(1, 12), 3) == 0);
    auto o = angle_orbit(Angle(1, 12), 3);
    CHECK(o.cycle_start == 1);
    CHECK(o.angles[1] == Angle(1, 4));
}

TEST_CASE("external rays follow Boettcher arguments") {
    auto c = ParamContext::make(kLam, 3);
    RayOptions ro;
    ro.depth = 6;
    auto r = trace_external_ray(c, Angle(1, 4), ro);
    REQUIRE(r.vertices.size() == std::size_t(ro.per_level * (ro.depth + 1) + 1));
    for (int i = 0; i <= r.per_level; ++i) {
        auto [L, Q] = log_bottcher(c, r.vertices[i]);
        CHECK(std::abs(std::remainder(L.imag() - kPi / 2, 2 * kPi)) < 1e-10);
        CHECK(std::abs(L.real() - r.green_levels[i]) < 1e-10);
    }
    // f maps R(1/4) onto R(3/4)
    auto s = trace_external_ray(c, Angle(3, 4), ro);
    for (std::size_t i = r.per_level; i < r.vertices.size(); ++i)
        CHECK(std::abs(f_eval(c, r.vertices[i]) - s.vertices[i - r.per_level]) < 1e-9);
    // green levels fall by a factor n per level
    for (std::size_t i = r.per_level; i < r.green_levels.size(); ++i)
        CHECK(std::abs(r.green_levels[i] * 3 - r.green_levels[i - r.per_level]) < 1e-12);
}

TEST_CASE("rays are equivariant under the rotation symmetry") {
    auto c = ParamContext::make(kLam, 3);
    RayOptions ro;
    ro.depth = 8;
    const cplx om = std::polar(1.0, kPi / 3);
    for (auto t : {Angle(1, 4), Angle(1, 2), Angle(5, 26)}) {
        auto a = trace_external_ray(c, t, ro);
        auto b = trace_external_ray(c, t.shifted(1, 6), ro);
        REQUIRE(a.vertices.size() == b.vertices.size());
        for (std::size_t i = 0; i < a.vertices.size(); ++i) CHECK(std::abs(om * a.vertices[i] - b.vertices[i]) < 1e-9);
    }
}

TEST_CASE("R(1/2) lands at the fixed point with itinerary (2)") {
    auto c = ParamContext::make(kLam, 3);
    auto r = trace_external_ray(c, Angle(1, 2));
    auto pp = periodic_point(c, {2});
    CHECK(std::abs(r.landing_estimate - pp.z) < 1e-6);
    CHECK(landing_decay(r) < 1);
    auto ref = refine_periodic_landing(c, r);
    CHECK(std::abs(ref.z - pp.z) < 1e-12);
    auto q = trace_external_ray(c, Angle(1, 4));
    CHECK(std::abs(refine_periodic_landing(c, q).z - periodic_point(c, {1, -1}).z) < 1e-12);
}

TEST_CASE("a real parameter: R(0) lands on the positive real axis") {
    auto c = ParamContext::make(0.1, 3);
    auto r = trace_external_ray(c, Angle(1, 1));
    auto p = refine_periodic_landing(c, r);
    CHECK(std::abs(p.z.imag()) < 1e-12);
    CHECK(std::abs(p.z.real() - 0.931102206) < 1e-6);
    CHECK(std::abs(p.multiplier) > 1);
    CHECK_THROWS_AS(refine_periodic_landing(c, trace_external_ray(c, Angle(1, 6))), std::invalid_argument);
}

TEST_CASE("cut ray approximants are nested and symmetric") {
    auto c = ParamContext::make(kLam, 3);
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(-3, 3);
    for (auto t : {Angle(1, 4), Angle(1, 2)}) {
        auto code = CutRayCode::of(t, 3);
        for (int i = 0; i < 2000; ++i) {
            cplx z(u(rng), u(rng));
            for (int m = 0; m < 4; ++m) {
                bool in = cut_ray_membership(c, code, m + 1, z);
                if (in) CHECK(cut_ray_membership(c, code, m, z));
            }
            CHECK(cut_ray_membership(c, code, 3, z) == cut_ray_membership(c, code, 3, -z));
        }
        CHECK(cut_ray_membership(c, code, 5, 0.0));
    }
}

TEST_CASE("traced rays lie in their cut rays") {
    auto c = ParamContext::make(kLam, 3);
    RayOptions ro;
    ro.depth = 10;
    for (auto t : {Angle(1, 4), Angle(1, 2)}) {
        auto r = trace_external_ray(c, t, ro);
        auto code = CutRayCode::of(t, 3);
        for (cplx z : r.vertices) CHECK(cut_ray_membership(c, code, 6, z));
    }
}

TEST_CASE("cut ray rasters show 2^(m+1) blobs") {
    auto c = ParamContext::make(kLam, 3);
    for (int m = 0; m <= 2; ++m) {
        auto a = trace_cut_ray_boundary(c, Angle(1, 2), m, Window{-3, 3, -3, 3}, 256, 256);
        CHECK(a.blob_count == (1 << (m + 1)));
        CHECK_FALSE(a.resolution_warning);
        CHECK(a.predicted_touches.size() == std::size_t(1 << m) * 2 - 1);
    }
    CHECK_THROWS_AS(trace_cut_ray_boundary(c, Angle(1, 2), -1, Window{-1, 1, -1, 1}, 16, 16), std::invalid_argument);
}

TEST_CASE("intersections of distinct cut rays") {
    auto c = ParamContext::make(kLam, 3);
    auto a = intersection_count(c, Angle(1, 4), Angle(1, 2));
    CHECK(a.J == 0);
    CHECK(a.predicted == 2);
    CHECK(a.matched);
    auto b = intersection_count(c, kappa(Itinerary::parse("1,-2|-1,1"), 3), Angle(1, 4));
    CHECK(b.J == 1);
    CHECK(b.located == 4);
    CHECK(b.matched);
    auto d = intersection_count(c, kappa(Itinerary::parse("2,2,1,-1|2"), 3), Angle(1, 2));
    CHECK(d.J == 2);
    CHECK(d.located == 8);
    CHECK(d.matched);
    CHECK_THROWS_AS(intersection_count(c, Angle(1, 4), Angle(3, 4)), same_cut_ray);
}

TEST_CASE("a cut ray meets the basin boundary in two antipodal points") {
    auto c = ParamContext::make(kLam, 3);
    auto b = boundary_intersection_points(c, Angle(1, 2));
    CHECK(b.refined);
    CHECK(std::abs(b.p + b.q) < 1e-10);
}

TEST_CASE("touchability") {
    auto c = ParamContext::make(kLam, 3);
    // free critical orbit: escapes, never on the cut rays
    CHECK_FALSE(touchability(c, {Angle(1, 4), Angle(1, 2)}).touchable);
    std::vector<cplx> orbit{periodic_point(c, {2}).z};
    auto t = touchability(c, {Angle(1, 2)}, 24, 64, 1e-6, &orbit);
    CHECK(t.touchable);
    CHECK(t.angle == Angle(1, 2));
    CHECK_FALSE(touchability(c, {Angle(1, 4)}, 24, 64, 1e-6, &orbit).touchable);
}

TEST_CASE("preimage cut rays contain their external rays") {
    auto c = ParamContext::make(kLam, 3);
    auto p = preimage_cut_ray(c, Angle(1, 6), 4);
    CHECK(p.ray_vertices_checked > 0);
    CHECK(p.ray_vertices_off == 0);
    auto full = full_ray_polyline(c, Angle(1, 4), 3);
    REQUIRE(full.vertices.size() > 10);
    long off = 0;
    auto code = CutRayCode::of(Angle(1, 4), 3);
    for (cplx z : full.vertices) off += !cut_ray_membership(c, code, 3, z);
    CHECK(off == 0);
}

TEST_CASE("component labels and contours") {
    const int w = 8, h = 8;
    std::vector<long long> key(w * h, -1);
    std::vector<std::uint8_t> mask(w * h, 0);
    for (int j = 2; j < 5; ++j)
        for (int i = 2; i < 5; ++i) key[j * w + i] = 0, mask[j * w + i] = 1;
    key[7 * w + 7] = 0;
    mask[7 * w + 7] = 1;
    std::vector<int> lab;
    CHECK(label_components(key, w, h, lab) == 2);
    CHECK(lab[0] == -1);
    auto loops = contour_loops(mask, w, h, Window{0, 8, 0, 8});
    CHECK(loops.size() == 2);
    // diagonal neighbours stay separate under 4-connectivity
    std::vector<long long> diag(w * h, -1);
    diag[0] = diag[w + 1] = 0;
    CHECK(label_components(diag, w, h, lab) == 2);
    CHECK(label_components(diag, w, h, lab, true) == 1);
}
