#pragma once

#include <span>
#include <vector>

#include "chyp/common.hpp"
#include "chyp/jet.hpp"

namespace chyp {

struct Monomial {
    std::vector<int> exponents;
    cplx coef{0.0, 0.0};

    int degree() const;
};

/// A polynomial map C^m -> C^M given per output component as a list of
/// monomials. Candidate proper ball maps are certified by
/// certify_proper() in proper_maps.hpp.
struct ProperMapSpec {
    int domain_dim = 0;
    int target_dim = 0;
    std::vector<std::vector<Monomial>> components;

    static constexpr int kMaxDegree = 8;
    static constexpr double kMaxCoefficient = 10.0;

    int degree() const;
    /// Structural checks: dimensions, exponent arity, degree and coefficient caps.
    void validate(int max_degree = kMaxDegree) const;

    template <class T>
    std::vector<T> evaluate(std::span<const T> z) const;
};

template <class T>
std::vector<T> ProperMapSpec::evaluate(std::span<const T> z) const {
    if (static_cast<int>(z.size()) != domain_dim) throw InputError("ProperMapSpec: input dimension mismatch");
    const int deg = degree();
    // powers[k][p] = z_k^p
    std::vector<std::vector<T>> powers(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        powers[k].reserve(deg + 1);
        powers[k].emplace_back(T(cplx(1.0, 0.0)));
        for (int p = 1; p <= deg; ++p) powers[k].push_back(powers[k].back() * z[k]);
    }
    std::vector<T> out;
    out.reserve(components.size());
    for (const auto& component : components) {
        T acc(cplx(0.0, 0.0));
        for (const auto& mono : component) {
            T term(mono.coef);
            for (std::size_t k = 0; k < mono.exponents.size(); ++k)
                if (mono.exponents[k] > 0) term = term * powers[k][mono.exponents[k]];
            acc = acc + term;
        }
        out.push_back(std::move(acc));
    }
    return out;
}

}  // namespace chyp
