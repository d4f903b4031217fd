#include <doctest.h>

#include <random>

#include "chyp/kobayashi.hpp"
#include "chyp/parallel.hpp"
#include "oracles.hpp"

using namespace chyp;

namespace {

std::vector<double> grid(double a, double b, int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = a + (b - a) * i / (n - 1);
    return t;
}

}  // namespace

TEST_CASE("distance: closed-form values") {
    CHECK(dist_ball(BallPoint::origin(2), BallPoint::origin(2)) == 0.0);
    CVec half(1);
    half << 0.5;
    CHECK(dist_ball(BallPoint::origin(1), BallPoint(half)) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-15));
    CHECK(std::isinf(dist_ball(BallPoint::origin(2), BallPoint::basis(2, 1))));
    CHECK_THROWS_AS(dist_ball(BallPoint::origin(2), BallPoint::origin(3)), InputError);
}

TEST_CASE("distance agrees with the literal acosh formula away from the sphere") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 300; ++i) {
        const int m = 1 + i % 3;
        const CVec z = oracle::random_ball_point(m, rng, 0.9);
        const CVec w = oracle::random_ball_point(m, rng, 0.9);
        const double ref = oracle::acosh_distance(z, w);
        if (ref < 1e-3) continue;  // acosh loses digits near 0
        CHECK(dist_ball(z, w) == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("distance is symmetric and Möbius invariant") {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 200; ++i) {
        const int m = 1 + i % 3;
        const BallPoint z(oracle::random_ball_point(m, rng));
        const BallPoint w(oracle::random_ball_point(m, rng));
        const Automorphism g = compose(unitary_automorphism(oracle::random_unitary(m, rng)),
                                       inverse(transport_to_origin(BallPoint(oracle::random_ball_point(m, rng, 0.9)))));
        const double d = dist_ball(z, w);
        CHECK(dist_ball(w, z) == d);
        CHECK(std::abs(dist_ball(apply_ball(g, z), apply_ball(g, w)) - d) <= 1e-11 * std::max(1.0, d));
    }
}

TEST_CASE("distance stays accurate near the sphere") {
    // a_s(0) and a_t(0) lie on one geodesic: the distance is |t - s| exactly.
    for (double s : {2.0, 5.0}) {
        const BallPoint p = apply_ball(cartan(s, 2), BallPoint::origin(2));
        const BallPoint q = apply_ball(cartan(s + 0.5, 2), BallPoint::origin(2));
        CHECK(dist_ball(p, q) == doctest::Approx(0.5).epsilon(1e-9));
    }
    CVec v(2);
    v << cplx(0.6, 0.0), cplx(0.0, 0.8);
    for (double s : {5.0, 10.0, 15.0, 18.0}) {
        const SampledCurve c = radial_geodesic(v, {s, s + 0.5});
        CHECK(dist_ball(c.ball_points()[0], c.ball_points()[1]) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(dist_ball(BallPoint::origin(2), c.ball_points()[0]) == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("triangle inequality") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 200; ++i) {
        const BallPoint a(oracle::random_ball_point(2, rng)), b(oracle::random_ball_point(2, rng)),
            c(oracle::random_ball_point(2, rng));
        CHECK(dist_ball(a, c) <= dist_ball(a, b) + dist_ball(b, c) + 1e-12);
    }
}

TEST_CASE("Siegel distance pulls back through the Cayley transform") {
    std::mt19937_64 rng(24);
    for (int i = 0; i < 50; ++i) {
        const BallPoint z(oracle::random_ball_point(2, rng)), w(oracle::random_ball_point(2, rng));
        CHECK(dist_siegel(cayley_to_siegel(z), cayley_to_siegel(w)) ==
              doctest::Approx(dist_ball(z, w)).epsilon(1e-10));
    }
}

TEST_CASE("radial geodesic") {
    CVec v(2);
    v << 1.0, 0.0;
    const auto t = grid(0.0, 12.0, 49);
    const SampledCurve c = radial_geodesic(v, t);
    CHECK(c.ball_points()[0].norm() == 0.0);
    const SampledCurve one = radial_geodesic(v, {1.0});
    CHECK(one.ball_points()[0].coords()(0).real() == doctest::Approx(0.761594155955765));
    for (std::size_t i = 0; i < t.size(); i += 3)
        for (std::size_t j = i + 1; j < t.size(); j += 5)
            CHECK(dist_ball(c.ball_points()[i], c.ball_points()[j]) == doctest::Approx(t[j] - t[i]).epsilon(1e-12));
    CVec not_unit(2);
    not_unit << 0.5, 0.0;
    CHECK_THROWS_AS(radial_geodesic(not_unit, t), InputError);
}

TEST_CASE("quasi-geodesic certificate") {
    std::mt19937_64 rng(25);
    const CVec v = oracle::random_unit(3, rng);
    const auto t = grid(0.0, 10.0, 41);
    CHECK(certify_quasi_geodesic(radial_geodesic(v, t), 1.0, 0.0).max_violation <= 1e-12);

    std::vector<double> doubled;
    for (double x : t) doubled.push_back(2.0 * x);
    const SampledCurve fast(t, radial_geodesic(v, doubled).ball_points());
    const auto cert = certify_quasi_geodesic(fast, 1.0, 0.0);
    CHECK(cert.max_violation > 1.0);
    CHECK_FALSE(cert.certified());
    CHECK(certify_quasi_geodesic(fast, 2.0, 0.0).max_violation <= 1e-12);
}

TEST_CASE("geodesic between two points") {
    std::mt19937_64 rng(26);
    const BallPoint p(oracle::random_ball_point(2, rng)), q(oracle::random_ball_point(2, rng));
    const double L = dist_ball(p, q);
    const SampledCurve c = geodesic_between(p, q, grid(0.0, L, 11));
    CHECK(dist_ball(c.ball_points().front(), p) <= 1e-12);
    CHECK(dist_ball(c.ball_points().back(), q) <= 1e-9);
    CHECK(certify_quasi_geodesic(c, 1.0, 0.0).max_violation <= 1e-10);
}

TEST_CASE("Hausdorff pseudo-distance") {
    CVec v(2), w(2);
    v << 1.0, 0.0;
    w << 0.0, cplx(0.0, 1.0);
    const double T = 4.0;
    const SampledCurve a = radial_geodesic(v, grid(0.0, T, 81));
    CHECK(hausdorff_pseudo_distance(a, a).value == 0.0);

    const SampledCurve longer = radial_geodesic(v, grid(0.0, T + 1.0, 101));
    const auto h = hausdorff_pseudo_distance(a, longer);
    CHECK(std::abs(h.value - 1.0) <= h.slack + 1e-12);

    const SampledCurve b = radial_geodesic(w, grid(0.0, T, 81));
    CHECK(hausdorff_pseudo_distance(a, b).value == doctest::Approx(hausdorff_pseudo_distance(b, a).value).epsilon(1e-12));
    CHECK(hausdorff_pseudo_distance(a, b).value > 1.0);
    CHECK(max_adjacent_distance(a) == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("curve validation") {
    CHECK_THROWS_AS(SampledCurve({0.0, 0.0}, std::vector<BallPoint>{BallPoint::origin(1), BallPoint::origin(1)}),
                    InputError);
    CHECK_THROWS_AS(SampledCurve({0.0, 1.0}, std::vector<BallPoint>{BallPoint::origin(1)}), InputError);
    CHECK_THROWS_AS(SampledCurve({0.0}, std::vector<BallPoint>{BallPoint::basis(2, 0)}), InputError);
}

TEST_CASE("Siegel curves convert to the ball model") {
    CVec v(2);
    v << 0.6, cplx(0.0, 0.8);
    const SampledCurve ball = radial_geodesic(v, grid(0.0, 3.0, 7));
    std::vector<SiegelPoint> pts;
    for (const auto& p : ball.ball_points()) pts.push_back(cayley_to_siegel(p));
    const SampledCurve back = to_ball_model(SampledCurve(ball.params(), pts));
    CHECK(hausdorff_pseudo_distance(ball, back).value <= 1e-12);
}

TEST_CASE("displace moves by the requested distance") {
    std::mt19937_64 rng(27);
    for (int i = 0; i < 20; ++i) {
        const BallPoint p(oracle::random_ball_point(3, rng));
        const double r = 0.1 + 0.2 * i;
        CHECK(dist_ball(p, displace(p, oracle::random_unit(3, rng), r)) == doctest::Approx(r).epsilon(1e-10));
    }
}

TEST_CASE("Morse constant estimate") {
    SUBCASE("exact geodesics") {
        const auto e = estimate_morse_constant(2, 1.0, 0.0, 0.0, 20, 1);
        CHECK(e.D <= e.slack + 1e-9);
    }
    SUBCASE("seeded and positive") {
        const auto a = estimate_morse_constant(1, 1.0, 1.0, 0.0, 100, 7);
        const auto b = estimate_morse_constant(1, 1.0, 1.0, 0.0, 100, 7);
        CHECK(a.D > 0.0);
        CHECK(a.D == b.D);
    }
    SUBCASE("worker count does not change the result") {
        const auto a = estimate_morse_constant(2, 1.5, 1.0, 0.2, 40, 9);
        const std::size_t saved = worker_count();
        worker_count() = 1;
        const auto b = estimate_morse_constant(2, 1.5, 1.0, 0.2, 40, 9);
        worker_count() = saved;
        CHECK(a.D == b.D);
    }
    SUBCASE("stable across seeds") {
        const double d1 = estimate_morse_constant(1, 1.0, 1.0, 0.0, 100, 1).D;
        const double d2 = estimate_morse_constant(1, 1.0, 1.0, 0.0, 100, 2).D;
        CHECK(std::abs(d1 - d2) <= 0.1 * std::max(d1, d2));
    }
    SUBCASE("monotone in beta on common seeds") {
        const auto e1 = estimate_morse_constant(1, 1.0, 1.0, 0.0, 100, 3);
        const auto e2 = estimate_morse_constant(1, 1.0, 2.0, 0.0, 100, 3);
        CHECK(e2.D >= e1.D - e1.slack);
    }
}

TEST_CASE("radial bound constants") {
    RadialBoundConstants c;
    c.C = 1.0;
    c.D = 0.5;
    c.base_offset = 0.25;
    CHECK(c.beta() == doctest::Approx(0.5 * std::log(2.0) + 0.25));
    CHECK(c.bound() == doctest::Approx(1.0 + c.beta() + 0.25));
}
