#pragma once

// Holomorphic maps assembled from elementary stages (ball automorphisms,
// polynomial maps, Cayley transforms, Siegel flows, linear maps). Every stage
// is evaluated generically, so the same chain yields values and, on Jet
// inputs, exact first and second complex derivatives by the chain rule.

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "chyp/common.hpp"
#include "chyp/group.hpp"
#include "chyp/jet.hpp"
#include "chyp/polynomial.hpp"

namespace chyp {

namespace stage {

/// Fractional-linear action of an automorphism on the ball model.
struct Mobius {
    Automorphism g;
};
struct Polynomial {
    ProperMapSpec spec;
};
/// F_m: ball -> Siegel.
struct CayleyToSiegel {
    int dim;
};
/// F_m^{-1}: Siegel -> ball.
struct CayleyToBall {
    int dim;
};
/// (e^{-s} z1, e^{-s/2} z2, ...), the Siegel-model flow with parameter s.
struct SiegelFlow {
    double s;
    int dim;
};
/// z -> A z.
struct Linear {
    CMat a;
};

}  // namespace stage

using Stage = std::variant<stage::Mobius, stage::Polynomial, stage::CayleyToSiegel, stage::CayleyToBall,
                           stage::SiegelFlow, stage::Linear>;

int stage_in_dim(const Stage& s);
int stage_out_dim(const Stage& s);

namespace detail {

template <class T>
std::vector<T> apply_stage(const stage::Mobius& st, std::span<const T> z) {
    const CMat& G = st.g.matrix();
    const auto m = static_cast<Eigen::Index>(z.size());
    if (m != G.rows() - 1) throw InputError("Mobius stage: dimension mismatch");
    T den(G(m, m));
    for (Eigen::Index j = 0; j < m; ++j) den = den + G(m, j) * z[j];
    if (std::abs(value_of(den)) == 0.0) throw NumericError("Mobius stage: vanishing denominator");
    const T inv = T(cplx(1.0, 0.0)) / den;
    std::vector<T> out;
    out.reserve(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        T num(G(i, m));
        for (Eigen::Index j = 0; j < m; ++j)
            if (G(i, j) != cplx(0.0, 0.0)) num = num + G(i, j) * z[j];
        out.push_back(num * inv);
    }
    return out;
}

template <class T>
std::vector<T> apply_stage(const stage::Polynomial& st, std::span<const T> z) {
    return st.spec.evaluate<T>(z);
}

template <class T>
std::vector<T> apply_stage(const stage::CayleyToSiegel& st, std::span<const T> z) {
    if (static_cast<int>(z.size()) != st.dim) throw InputError("Cayley stage: dimension mismatch");
    const T den = T(cplx(1.0, 0.0)) + z[0];
    if (std::abs(value_of(den)) <= kCayleyExcludedRadius)
        throw NumericError("Cayley transform undefined at the excluded boundary point z1 = -1");
    const T inv = T(cplx(1.0, 0.0)) / den;
    std::vector<T> out;
    out.reserve(z.size());
    out.push_back(T(kI) * (T(cplx(1.0, 0.0)) - z[0]) * inv);
    for (std::size_t k = 1; k < z.size(); ++k) out.push_back(z[k] * inv);
    return out;
}

template <class T>
std::vector<T> apply_stage(const stage::CayleyToBall& st, std::span<const T> w) {
    if (static_cast<int>(w.size()) != st.dim) throw InputError("inverse Cayley stage: dimension mismatch");
    const T den = w[0] + T(kI);
    if (std::abs(value_of(den)) <= kCayleyExcludedRadius)
        throw NumericError("inverse Cayley transform undefined at the excluded point z1 = -i");
    const T inv = T(cplx(1.0, 0.0)) / den;
    std::vector<T> out;
    out.reserve(w.size());
    out.push_back((T(kI) - w[0]) * inv);
    for (std::size_t k = 1; k < w.size(); ++k) out.push_back(T(cplx(0.0, 2.0)) * w[k] * inv);
    return out;
}

template <class T>
std::vector<T> apply_stage(const stage::SiegelFlow& st, std::span<const T> w) {
    if (static_cast<int>(w.size()) != st.dim) throw InputError("Siegel flow stage: dimension mismatch");
    std::vector<T> out(w.begin(), w.end());
    const cplx full(std::exp(-st.s), 0.0);
    const cplx half(std::exp(-0.5 * st.s), 0.0);
    out[0] = T(full) * out[0];
    for (std::size_t k = 1; k < out.size(); ++k) out[k] = T(half) * out[k];
    return out;
}

template <class T>
std::vector<T> apply_stage(const stage::Linear& st, std::span<const T> z) {
    if (static_cast<Eigen::Index>(z.size()) != st.a.cols()) throw InputError("Linear stage: dimension mismatch");
    std::vector<T> out;
    out.reserve(st.a.rows());
    for (Eigen::Index i = 0; i < st.a.rows(); ++i) {
        T acc(cplx(0.0, 0.0));
        for (Eigen::Index j = 0; j < st.a.cols(); ++j)
            if (st.a(i, j) != cplx(0.0, 0.0)) acc = acc + st.a(i, j) * z[j];
        out.push_back(std::move(acc));
    }
    return out;
}

}  // namespace detail

/// Composition of stages, applied left to right.
class MapChain {
public:
    MapChain() = default;
    explicit MapChain(Stage first);
    MapChain(const ProperMapSpec& spec);  // NOLINT(google-explicit-constructor)

    int in_dim() const { return in_dim_; }
    int out_dim() const { return out_dim_; }
    const std::vector<Stage>& stages() const { return stages_; }
    bool empty() const { return stages_.empty(); }

    /// Appends a stage applied after the current chain.
    MapChain then(Stage next) const;
    /// Appends another chain applied after this one.
    MapChain then(const MapChain& next) const;

    template <class T>
    std::vector<T> apply(std::vector<T> z) const {
        for (const auto& st : stages_)
            z = std::visit([&](const auto& s) { return detail::apply_stage<T>(s, std::span<const T>(z)); }, st);
        return z;
    }

    CVec operator()(const CVec& z) const;

private:
    std::vector<Stage> stages_;
    int in_dim_ = 0;
    int out_dim_ = 0;
};

/// Value, first and second complex derivatives of a map at a base point.
/// second[j](k, l) = d^2 [g]_j / dz_k dz_l, exactly symmetric in (k, l).
struct JetExpansion {
    CVec base;
    CVec value;
    CMat first;
    std::vector<CMat> second;
    /// Largest relative discrepancy against central finite differences
    /// (0 when the check was skipped).
    double error_norm = 0.0;

    int domain_dim() const { return static_cast<int>(first.cols()); }
    int target_dim() const { return static_cast<int>(first.rows()); }
};

struct JetOptions {
    bool finite_difference_check = true;
    double step = 1e-4;
    /// Relative agreement required for the jet to be accepted as consistent.
    double required_agreement = 1e-6;
    /// Disagreement above this raises NumericError.
    double failure_threshold = 1e-4;
};

/// Jet of `map` at `base` through the exact chain rule.
JetExpansion jet_at(const MapChain& map, const CVec& base, const JetOptions& options = {});

/// Jet at the origin; for Siegel-coordinate maps this is the boundary base point 0.
JetExpansion jet_at_zero(const MapChain& map, const JetOptions& options = {});

/// Jet of an explicit polynomial-in-z model: value + first z + 1/2 z^T second z.
CVec evaluate_quadratic_model(const JetExpansion& jet, const CVec& z);

/// Max relative discrepancy between the jet and central finite differences
/// with step h. Relative errors are scaled by max(1, |coefficient|).
double finite_difference_discrepancy(const MapChain& map, const JetExpansion& jet, double h);

}  // namespace chyp
