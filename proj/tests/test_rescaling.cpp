#include <doctest.h>

#include <random>

#include "chyp/rescaling.hpp"
#include "oracles.hpp"

using namespace chyp;

namespace {

JetExpansion linear_limit_jet(int m, int M) {
    JetExpansion j;
    j.base = CVec::Zero(m);
    j.value = CVec::Zero(M);
    j.first = CMat::Zero(M, m);
    j.first.topRows(m) = CMat::Identity(m, m);
    j.second.assign(M, CMat::Zero(m, m));
    return j;
}

QuadraticNormalForm linear_normal_form(int m, int M, double lambda) {
    QuadraticNormalForm nf;
    nf.lambda = lambda;
    nf.U = CMat::Zero(M - 1, m - 1);
    nf.U.topRows(m - 1) = std::sqrt(lambda) * CMat::Identity(m - 1, m - 1);
    nf.L = CMat::Zero(m - 1, m - 1);
    return nf;
}

RescalingTrace trace_for(const ProperMapSpec& f, int n_start, int n_end) {
    return build_sequence(MapChain(f), cartan_sequence(f.domain_dim, f.target_dim, n_start, n_end));
}

}  // namespace

TEST_CASE("scaling table exponents") {
    const int m = 3, M = 5;
    CHECK(first_order_exponent(1, 1, m, M) == 0.0);
    CHECK(first_order_exponent(1, 2, m, M) == 0.5);
    CHECK(first_order_exponent(2, 1, m, M) == -0.5);
    CHECK(first_order_exponent(3, 2, m, M) == 0.0);
    CHECK(second_order_exponent(1, 1, 1, m, M) == -1.0);
    CHECK(second_order_exponent(1, 1, 2, m, M) == -0.5);
    CHECK(second_order_exponent(1, 2, 3, m, M) == 0.0);
    CHECK(second_order_exponent(2, 1, 1, m, M) == -1.5);
    CHECK(second_order_exponent(4, 2, 1, m, M) == -1.0);
    CHECK(second_order_exponent(5, 2, 2, m, M) == -0.5);
    CHECK_THROWS_AS(first_order_exponent(0, 1, m, M), InputError);
    CHECK_THROWS_AS(second_order_exponent(1, 1, 4, m, M), InputError);

    const double s = 1.7;
    CHECK(scaling_factor(1, 1, s, m, M) == 1.0);
    CHECK(scaling_factor(1, 2, s, m, M) == doctest::Approx(std::exp(s / 2)));
    CHECK(scaling_factor(2, 1, 1, s, m, M) == doctest::Approx(std::exp(-1.5 * s)));

    const ScalingProfile p = scaling_profile(m, M);
    for (int j = 0; j < M; ++j)
        for (int k = 0; k < m; ++k) {
            CHECK(p.first(j, k) == first_order_exponent(j + 1, k + 1, m, M));
            for (int l = 0; l < m; ++l) CHECK(p.second[j](k, l) == p.second[j](l, k));
        }
}

TEST_CASE("escape check") {
    const auto seq = cartan_sequence(2, 4, 1, 10);
    const EscapeReport r = escape_check(seq);
    CHECK(r.escaping);
    CHECK(r.phi_gaps.back() == doctest::Approx(1.0 - std::tanh(10.0)).epsilon(1e-10));
    CHECK(r.phi_gaps.back() == doctest::Approx(4.1e-9).epsilon(0.01));

    SymmetrySequence still;
    for (int n = 1; n <= 3; ++n) {
        still.indices.push_back(n);
        still.phi.push_back(Automorphism::identity(2));
        still.psi.push_back(Automorphism::identity(4));
    }
    const EscapeReport s = escape_check(still);
    CHECK_FALSE(s.escaping);
    CHECK_FALSE(s.message.empty());

    PipelineResult out;
    CHECK_THROWS_AS(run_rescaling_pipeline(catalog::linear(2, 4), still, {}, out), DiagnosticError);
    CHECK(out.stage == "escape_check");
}

TEST_CASE("psi escapes whenever phi does for proper f") {
    std::mt19937_64 rng(51);
    const auto seq = rotated_cartan_sequence(oracle::random_unitary(2, rng), 4, 1, 8);
    const auto r = escape_check(seq);
    CHECK(r.escaping);
    CHECK(r.psi_gaps.back() < 1e-6);
}

TEST_CASE("normalize_map") {
    SUBCASE("linear map is left unchanged") {
        const auto p = normalize_map(catalog::linear(2, 4), cartan_sequence(2, 4, 1, 6));
        CHECK(distance(p.pre, Automorphism::identity(2)) == 0.0);
        CHECK(distance(p.post, Automorphism::identity(4)) == 0.0);
        CHECK(p.map.stages().size() == 1);
        CHECK(p.output_residual <= 1e-12);
    }
    SUBCASE("rotated sequence is brought back to e1") {
        std::mt19937_64 rng(52);
        const CMat u = oracle::random_unitary(3, rng);
        const auto p = normalize_map(catalog::linear(3, 5), rotated_cartan_sequence(u, 5, 1, 8));
        const BallPoint last = origin_image(p.sequence.phi.back());
        CHECK((last.coords() / last.norm() - CVec::Unit(3, 0)).norm() <= 1e-8);
        const CVec image = p.map(CVec::Unit(3, 0));
        CHECK((image - CVec::Unit(5, 0)).norm() <= 1e-8);
        CHECK(p.map(CVec::Zero(3)).norm() <= 1e-12);
        CHECK(p.output_residual <= 1e-9);
    }
    SUBCASE("non-member sequence is rejected with its residual") {
        try {
            normalize_map(catalog::whitney(), cartan_sequence(2, 3, 1, 4));
            FAIL("expected SymmetryError");
        } catch (const SymmetryError& e) {
            CHECK(e.residual() > 0.1);
            CHECK(e.index() == 1);
        }
    }
}

TEST_CASE("trace of the linear embedding") {
    const RescalingTrace trace = trace_for(catalog::linear(2, 4), 1, 8);
    REQUIRE(trace.entries.size() == 8);
    for (const auto& e : trace.entries) {
        CHECK(e.t == doctest::Approx(e.index).epsilon(1e-12));
        CHECK(distance(e.k, Automorphism::identity(2)) <= 1e-15);
        CHECK(distance(e.l, Automorphism::identity(4)) <= 1e-15);
        CHECK(e.g_value_norm <= 1e-10);
        CHECK(e.h_value_norm <= 1e-10);
        CHECK(e.compactness_distance <= 1e-9);
        CHECK((e.g_jet.first - linear_limit_jet(2, 4).first).norm() <= 1e-12);
        CHECK(e.phi_gap > 0.0);
        CHECK(e.psi_gap > 0.0);
    }
    CHECK(verify_scaling_law(trace).max_relative_error <= 1e-12);
}

TEST_CASE("trace invariants for non-symmetric Cartan-type sequences") {
    for (const auto& f : {catalog::whitney(), catalog::power(2, 2), catalog::whitney(3)}) {
        const RescalingTrace trace = trace_for(f, 1, 10);
        for (const auto& e : trace.entries) {
            const BallPoint o = origin_image(cartan(e.index, f.domain_dim));
            CHECK(e.t == doctest::Approx(o.radial_time()).epsilon(1e-12));
            CHECK(e.g_value_norm <= 1e-10);
            CHECK(e.h_jet.error_norm <= 1e-6);
        }
        CHECK(verify_scaling_law(trace).max_relative_error <= 1e-8);
    }
}

TEST_CASE("conjugation identity on symmetry sequences") {
    // beta_n f alpha_n^{-1} = a_{-t} h_n a_t only holds for pairs in G_f, and the
    // direct form loses about e^{2t} ulps, so the check stops at t = 6.
    std::mt19937_64 rng(56);
    const auto p = normalize_map(catalog::linear(3, 5), rotated_cartan_sequence(oracle::random_unitary(3, rng), 5, 1, 6));
    for (const auto& trace : {build_sequence(p.map, p.sequence), trace_for(catalog::linear(2, 4), 1, 6),
                              trace_for(catalog::linear(1, 3), 1, 6)}) {
        for (const auto& e : trace.entries) CHECK(e.conjugation_residual <= 1e-9);
    }
}

TEST_CASE("scaling law at a single index") {
    const RescalingTrace trace = trace_for(catalog::whitney(), 3, 3);
    CHECK(verify_scaling_law(trace).max_relative_error <= 1e-8);
}

TEST_CASE("scaling law on a randomized polynomial map") {
    // A unitary rotation of whitney keeps properness and f(0) = 0; rotate the
    // target so that f(e1) = e1' still holds.
    std::mt19937_64 rng(53);
    CMat u = CMat::Identity(3, 3);
    u.bottomRightCorner(2, 2) = oracle::random_unitary(2, rng);
    ProperMapSpec f = catalog::whitney();
    ProperMapSpec g = f;
    g.components.assign(3, {});
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i)
            for (auto mono : f.components[i]) {
                mono.coef *= u(j, i);
                if (std::abs(mono.coef) > 0.0) g.components[j].push_back(mono);
            }
    certify_proper(g);
    CHECK(verify_scaling_law(trace_for(g, 1, 6)).max_relative_error <= 1e-8);
}

TEST_CASE("build_sequence preconditions") {
    CHECK_THROWS_AS(build_sequence(MapChain(catalog::linear(2, 4)), cartan_sequence(2, 4, 17, 19)), InputError);
    SymmetrySequence fixed;
    fixed.indices = {1};
    fixed.phi = {Automorphism::identity(2)};
    fixed.psi = {Automorphism::identity(4)};
    CHECK_THROWS_AS(build_sequence(MapChain(catalog::linear(2, 4)), fixed), DiagnosticError);
}

TEST_CASE("limit jet") {
    SUBCASE("linear embedding") {
        const LimitJetReport r = extract_limit_jet(trace_for(catalog::linear(2, 4), 1, 8), 3);
        CHECK(r.cauchy);
        CHECK_FALSE(r.wide_confidence);
        for (double d : r.cauchy_differences) CHECK(d <= 1e-12);
        CHECK((r.jet.first - linear_limit_jet(2, 4).first).norm() <= 1e-12);
    }
    SUBCASE("degenerate tail") {
        const LimitJetReport r = extract_limit_jet(trace_for(catalog::linear(2, 4), 1, 2), 1);
        CHECK(r.wide_confidence);
        CHECK_THROWS_AS(extract_limit_jet(trace_for(catalog::linear(2, 4), 1, 2), 2), InputError);
    }
    SUBCASE("suppressed coefficients decay geometrically for whitney") {
        const LimitJetReport r = extract_limit_jet(trace_for(catalog::whitney(), 1, 10), 3);
        for (std::size_t i = 1; i < r.suppressed.size(); ++i) CHECK(r.suppressed[i] < r.suppressed[i - 1]);
        CHECK(r.decay_rate >= 0.5 - 1e-3);
        CHECK(r.decay_ok);
    }
}

TEST_CASE("quadratic normal form") {
    SUBCASE("linear embedding") {
        const auto nf = quadratic_normal_form(linear_limit_jet(3, 5));
        CHECK(nf.lambda == 1.0);
        CHECK((nf.U - linear_normal_form(3, 5, 1.0).U).norm() == 0.0);
        CHECK(nf.L.norm() == 0.0);
    }
    SUBCASE("pattern violations name the coefficient class") {
        JetExpansion j = linear_limit_jet(2, 4);
        j.first(1, 0) = 0.1;
        try {
            quadratic_normal_form(j);
            FAIL("expected PatternError");
        } catch (const PatternError& e) {
            CHECK(e.coefficient_class() == "(j≥2, k=1)");
            CHECK(e.magnitude() == doctest::Approx(0.1));
        }
        JetExpansion k = linear_limit_jet(2, 4);
        k.first(0, 1) = 0.01;
        CHECK_THROWS_WITH_AS(quadratic_normal_form(k), doctest::Contains("(j=1, k≥2)"), PatternError);
        JetExpansion q = linear_limit_jet(2, 4);
        q.second[2](1, 1) = 0.01;
        CHECK_THROWS_WITH_AS(quadratic_normal_form(q), doctest::Contains("(j≥2; all k,ℓ)"), PatternError);
        JetExpansion r = linear_limit_jet(2, 4);
        r.second[0](0, 0) = 0.01;
        CHECK_THROWS_WITH_AS(quadratic_normal_form(r), doctest::Contains("(j=1; k=1 or ℓ=1)"), PatternError);
    }
    SUBCASE("complex lambda") {
        JetExpansion j = linear_limit_jet(2, 4);
        j.first(0, 0) = cplx(0.0, 1.0);
        CHECK_THROWS_AS(quadratic_normal_form(j), PatternError);
    }
    SUBCASE("L is half the second derivative") {
        JetExpansion j = linear_limit_jet(3, 5);
        j.second[0](1, 2) = j.second[0](2, 1) = 0.4;
        const auto nf = quadratic_normal_form(j);
        CHECK(std::abs(nf.L(0, 1) - 0.2) <= 1e-16);
    }
}

TEST_CASE("boundary identity") {
    const auto ok = verify_boundary_identity(linear_normal_form(3, 5, 1.0));
    CHECK(ok.quadratic <= 1e-12);
    CHECK(ok.isometry <= 1e-12);

    QuadraticNormalForm withL = linear_normal_form(3, 5, 1.0);
    withL.L(0, 0) = 0.1;
    CHECK(verify_boundary_identity(withL).quadratic >= 0.05);

    QuadraticNormalForm stretched = linear_normal_form(3, 5, 1.0);
    stretched.U.col(0) *= 1.1;
    CHECK(verify_boundary_identity(stretched).isometry >= 0.2);

    // A dilation of the first coordinate only is not a sphere map.
    QuadraticNormalForm dilated = linear_normal_form(3, 5, 1.0);
    dilated.lambda = 2.0;
    CHECK(verify_boundary_identity(dilated).isometry >= 0.5);
}

TEST_CASE("final normalization") {
    SUBCASE("trivial") {
        QuadraticNormalForm nf = linear_normal_form(3, 5, 1.0);
        const auto fin = final_normalization(nf, linear_limit_jet(3, 5));
        CHECK(distance(fin.A, Automorphism::identity(5)) <= 1e-15);
        CHECK(fin.flatten_residual == 0.0);
        CHECK((nf.U_prime - CMat::Identity(4, 4)).norm() == 0.0);
    }
    SUBCASE("lambda = 4") {
        JetExpansion j = linear_limit_jet(3, 5);
        j.first(0, 0) = 4.0;
        j.first(1, 1) = j.first(2, 2) = 2.0;
        QuadraticNormalForm nf = quadratic_normal_form(j);
        CHECK(nf.lambda == 4.0);
        const auto fin = final_normalization(nf, j);
        CHECK(fin.flatten_residual <= 1e-10);
        CHECK(is_member(fin.A));
    }
    SUBCASE("U' completes U / sqrt(lambda) to a unitary") {
        std::mt19937_64 rng(54);
        const CMat w = oracle::random_unitary(4, rng);
        JetExpansion j = linear_limit_jet(3, 5);
        j.first.bottomRightCorner(4, 2) = w.leftCols(2);
        QuadraticNormalForm nf = quadratic_normal_form(j);
        const auto fin = final_normalization(nf, j);
        CHECK((nf.U_prime.adjoint() * nf.U_prime - CMat::Identity(4, 4)).norm() <= 1e-10);
        CHECK((nf.U_prime.leftCols(2) - nf.U / std::sqrt(nf.lambda)).norm() <= 1e-12);
        CHECK((nf.U_prime - oracle::gram_schmidt(nf.U / std::sqrt(nf.lambda), 4)).norm() <= 1e-12);
        CHECK(fin.flatten_residual <= 1e-8);
    }
    SUBCASE("boundary residuals must be small") {
        QuadraticNormalForm nf = linear_normal_form(3, 5, 1.0);
        nf.U.col(0) *= 1.1;
        CHECK_THROWS(final_normalization(nf, linear_limit_jet(3, 5)));
    }
}

TEST_CASE("pipeline end to end") {
    SUBCASE("linear(2,4)") {
        PipelineResult r;
        run_rescaling_pipeline(catalog::linear(2, 4), cartan_sequence(2, 4, 1, 12), {}, r);
        CHECK(r.stage == "done");
        CHECK(r.normal_form.lambda == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(r.final.flatten_residual <= 1e-8);
        CHECK(is_member(r.final.A));
    }
    SUBCASE("identity map, m = M = 1") {
        PipelineResult r;
        run_rescaling_pipeline(catalog::linear(1, 1), cartan_sequence(1, 1, 1, 6), {}, r);
        CHECK(r.normal_form.lambda == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.normal_form.U.size() == 0);
        CHECK(r.final.flatten_residual <= 1e-12);
    }
    SUBCASE("rotated sequence") {
        std::mt19937_64 rng(55);
        PipelineResult r;
        // Rounding in the rotated pairs is amplified by about e^{2 t_N}; N = 8 keeps it near 1e-9.
        run_rescaling_pipeline(catalog::linear(3, 5), rotated_cartan_sequence(oracle::random_unitary(3, rng), 5, 1, 8),
                               {}, r);
        CHECK(r.normal_form.lambda == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(r.normal_form.residuals.L_norm <= 1e-6);
        CHECK(r.final.flatten_residual <= 1e-8);
    }
    SUBCASE("failures leave the stage name behind") {
        PipelineResult r;
        CHECK_THROWS_AS(run_rescaling_pipeline(catalog::whitney(), cartan_sequence(2, 3, 1, 5), {}, r), SymmetryError);
        CHECK(r.stage == "normalize_map");
    }
}

TEST_CASE("Siegel samples lie in the domain") {
    for (const auto& w : siegel_samples(3, 50, 7)) {
        CHECK(siegel_defining_function(w) > 0.0);
        CHECK(w.tail(2).norm() <= 0.5);
    }
}
