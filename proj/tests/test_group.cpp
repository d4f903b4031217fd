#include <doctest.h>

#include <random>

#include "chyp/group.hpp"
#include "oracles.hpp"

using namespace chyp;

namespace {

CVec vec(std::initializer_list<cplx> xs) {
    CVec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (cplx x : xs) v(k++) = x;
    return v;
}

Automorphism random_automorphism(int m, std::mt19937_64& rng) {
    const CMat u = oracle::random_unitary(m, rng);
    const BallPoint p(oracle::random_ball_point(m, rng, 0.9));
    return compose(unitary_automorphism(u), inverse(transport_to_origin(p)));
}

}  // namespace

TEST_CASE("hermitian form signature") {
    for (int m = 1; m <= 3; ++m) {
        CHECK(hermitian_form(CVec::Unit(m + 1, 0), CVec::Unit(m + 1, 0)) == cplx(1.0));
        CHECK(hermitian_form(CVec::Unit(m + 1, m), CVec::Unit(m + 1, m)) == cplx(-1.0));
    }
    const CVec null = vec({1.0, 0.0, 1.0});
    CHECK(std::abs(hermitian_form(null, null)) == 0.0);
}

TEST_CASE("membership residual") {
    CHECK(verify_membership(Automorphism::identity(3)) == 0.0);
    CHECK(verify_membership(cartan(1.0, 2)) <= 1e-14);
    CMat bad = CMat::Identity(3, 3);
    bad(0, 0) = 2.0;
    CHECK(verify_membership(Automorphism(bad)) >= 1.0);
    CHECK_FALSE(is_member(Automorphism(bad)));
}

TEST_CASE("canonical normalization fixes the phase of the corner") {
    std::mt19937_64 rng(3);
    const Automorphism g = random_automorphism(2, rng);
    const Automorphism h(g.matrix() * std::polar(1.0, 0.7));
    CHECK(distance(g, h) <= 1e-14);
    CHECK(g.corner().imag() == 0.0);
    CHECK(g.corner().real() > 0.0);
}

TEST_CASE("ball action") {
    SUBCASE("a_t moves the origin along e1") {
        for (double t : {0.0, 0.3, 2.0, 9.0}) {
            const BallPoint p = apply_ball(cartan(t, 3), BallPoint::origin(3));
            CHECK(std::abs(p.coords()(0) - std::tanh(t)) <= 1e-15);
            CHECK(p.coords().tail(2).norm() == 0.0);
            CHECK(p.gap() == doctest::Approx(1.0 / (std::cosh(t) * std::cosh(t))).epsilon(1e-14));
        }
    }
    SUBCASE("scalar fractional-linear example") {
        const BallPoint p = apply_ball(cartan(std::atanh(0.5), 1), BallPoint(vec({0.5})));
        CHECK(std::abs(p.coords()(0) - 0.8) <= 1e-15);
    }
    SUBCASE("identity") {
        const BallPoint z(vec({cplx(0.1, 0.2), cplx(-0.3, 0.05)}));
        CHECK((apply_ball(Automorphism::identity(2), z).coords() - z.coords()).norm() == 0.0);
    }
    SUBCASE("gap propagation near the sphere") {
        const BallPoint p = apply_ball(cartan(15.0, 2), BallPoint::origin(2));
        const double exact = 1.0 / (std::cosh(15.0) * std::cosh(15.0));
        CHECK(p.gap() == doctest::Approx(exact).epsilon(1e-13));
    }
    SUBCASE("points outside the ball are rejected") {
        CHECK_THROWS_AS(BallPoint(vec({1.1, 0.0})), InputError);
    }
}

TEST_CASE("cartan flow is a one-parameter group") {
    CHECK(distance(cartan(0.0, 2), Automorphism::identity(2)) == 0.0);
    CHECK(distance(compose(cartan(1.0, 2), cartan(2.0, 2)), cartan(3.0, 2)) <= 1e-12);
    CHECK(distance(compose(cartan(0.4, 3), cartan(-1.1, 3)), cartan(-0.7, 3)) <= 1e-12);
    CHECK((cartan(0.8, 2).matrix() - oracle::cartan_matrix(0.8, 2)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("rotation_mapping_e1") {
    CHECK(distance(rotation_mapping_e1(CVec::Unit(3, 0)), Automorphism::identity(3)) == 0.0);

    const Automorphism k = rotation_mapping_e1(vec({0.0, 1.0}));
    const CMat u = k.linear_block();
    CHECK((u.col(0) - vec({0.0, 1.0})).norm() == 0.0);
    CHECK((u - oracle::gram_schmidt(vec({0.0, 1.0}), 2)).norm() <= 1e-15);

    std::mt19937_64 rng(11);
    for (int m = 1; m <= 4; ++m) {
        const CVec v = oracle::random_unit(m, rng);
        const Automorphism r = rotation_mapping_e1(v);
        CHECK(verify_membership(r) <= 1e-13);
        CHECK((apply_ball(r, BallPoint::basis(m, 0)).coords() - v).norm() <= 1e-15);
        CHECK((r.linear_block() - oracle::gram_schmidt(v, m)).norm() <= 1e-13);
    }
}

TEST_CASE("unitary completion") {
    CMat cols(3, 1);
    cols << 0.0, 1.0, 0.0;
    const CMat u = unitary_completion(cols, 3);
    CHECK((u.adjoint() * u - CMat::Identity(3, 3)).norm() <= 1e-15);
    CHECK((u.col(0) - cols.col(0)).norm() == 0.0);
    CMat dependent(2, 3);
    dependent << 1.0, 2.0, 0.0, 0.0, 0.0, 0.0;
    CHECK_NOTHROW(unitary_completion(dependent.leftCols(1), 2));
}

TEST_CASE("transport_to_origin") {
    CHECK(distance(transport_to_origin(BallPoint::origin(2)), Automorphism::identity(2)) <= 1e-15);

    const BallPoint p(vec({std::tanh(1.0), 0.0}));
    const Automorphism g = transport_to_origin(p);
    CHECK(distance(g, cartan(-1.0, 2)) <= 1e-13);
    CHECK(apply_ball(g, p).norm() <= 1e-13);

    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const BallPoint q(oracle::random_unit(3, rng) * 0.9);
        CHECK(apply_ball(transport_to_origin(q), q).norm() <= 1e-12);
    }
}

TEST_CASE("composition and inverse") {
    std::mt19937_64 rng(7);
    for (int m = 1; m <= 3; ++m) {
        const Automorphism g = random_automorphism(m, rng);
        const Automorphism h = random_automorphism(m, rng);
        CHECK(distance(compose(g, inverse(g)), Automorphism::identity(m)) <= 1e-12);
        CHECK(distance(compose(Automorphism::identity(m), g), g) <= 1e-15);
        const BallPoint z(oracle::random_ball_point(m, rng));
        const CVec lhs = apply_ball(compose(g, h), z).coords();
        const CVec rhs = apply_ball(g, apply_ball(h, z)).coords();
        CHECK((lhs - rhs).norm() <= 1e-12);
        CHECK((lhs - oracle::act(g.matrix() * h.matrix(), z.coords())).norm() <= 1e-12);
    }
}

TEST_CASE("membership tolerance grows with the translation part") {
    const Automorphism far = cartan(17.0, 2);
    CHECK(membership_tolerance(far) > 1e10 * membership_tolerance(Automorphism::identity(2)));
    CHECK(is_member(far));
    CHECK(is_member(compose(rotation_mapping_e1(CVec::Unit(2, 1)), far)));
}

TEST_CASE("Cayley transform") {
    SUBCASE("base points") {
        CHECK(cayley_to_siegel(BallPoint::basis(3, 0)).coords().norm() == 0.0);
        const CVec f0 = cayley_to_siegel(BallPoint::origin(3)).coords();
        CHECK(std::abs(f0(0) - kI) == 0.0);
        CHECK(f0.tail(2).norm() == 0.0);
        CHECK((cayley_to_ball(SiegelPoint(CVec::Zero(2))).coords() - CVec::Unit(2, 0)).norm() == 0.0);
    }
    SUBCASE("roundtrip") {
        std::mt19937_64 rng(13);
        for (int i = 0; i < 100; ++i) {
            const int m = 1 + i % 3;
            const BallPoint z(oracle::random_ball_point(m, rng));
            const SiegelPoint w = cayley_to_siegel(z);
            CHECK(w.rho() > 0.0);
            CHECK((cayley_to_ball(w).coords() - z.coords()).norm() <= 1e-13);
        }
    }
    SUBCASE("excluded point") {
        CHECK_THROWS_AS(cayley_to_siegel(BallPoint(vec({-1.0, 0.0}))), NumericError);
    }
}

TEST_CASE("Siegel flow") {
    const SiegelPoint w(vec({cplx(0.3, 0.9), cplx(0.2, -0.1)}));
    CHECK((cartan_siegel(0.0, w).coords() - w.coords()).norm() == 0.0);

    const CVec tail = vec({cplx(0.3, 0.4)});
    const CVec boundary = vec({cplx(0.0, tail.squaredNorm()), tail(0)});
    const SiegelPoint b = cartan_siegel(1.3, SiegelPoint(boundary));
    CHECK(std::abs(b.coords()(0) - std::exp(-1.3) * boundary(0)) <= 1e-15);
    CHECK(std::abs(siegel_defining_function(b.coords())) <= 1e-15);

    // Conjugating the ball flow a_t by F_m gives the Siegel flow with parameter 2t.
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        const int m = 1 + i % 3;
        const double t = 0.1 + 0.02 * i;
        const BallPoint z(oracle::random_ball_point(m, rng, 0.8));
        const CVec via_ball = cayley_to_siegel(apply_ball(cartan(t, m), z)).coords();
        const CVec via_siegel = cartan_siegel_of_ball(t, cayley_to_siegel(z)).coords();
        CHECK((via_ball - via_siegel).norm() <= 1e-12 * std::max(1.0, via_ball.norm()));
        const SiegelPoint s = cayley_to_siegel(z);
        CHECK(std::abs(cartan_siegel(t, s).rho() - std::exp(-t) * s.rho()) <= 1e-12 * s.rho());
    }
}
