#pragma once

#include "chyp/common.hpp"

namespace chyp {

/// Second-order forward-mode jet of a holomorphic function of n complex
/// variables: value, complex gradient d/dz_k and Hessian d^2/dz_k dz_l.
/// A jet with an empty gradient is a constant.
struct Jet {
    cplx v{0.0, 0.0};
    CVec d;
    CMat dd;

    Jet() = default;
    Jet(cplx value) : v(value) {}  // NOLINT(google-explicit-constructor)
    Jet(double value) : v(value, 0.0) {}  // NOLINT(google-explicit-constructor)

    static Jet variable(cplx value, Eigen::Index index, Eigen::Index nvars) {
        Jet j(value);
        j.d = CVec::Zero(nvars);
        j.d(index) = 1.0;
        j.dd = CMat::Zero(nvars, nvars);
        return j;
    }

    bool is_constant() const { return d.size() == 0; }
    Eigen::Index nvars() const { return d.size(); }
};

namespace detail {

inline Eigen::Index common_vars(const Jet& a, const Jet& b) {
    return std::max(a.nvars(), b.nvars());
}

inline void promote(Jet& a, Eigen::Index n) {
    if (a.nvars() == n) return;
    a.d = CVec::Zero(n);
    a.dd = CMat::Zero(n, n);
}

/// Applies a scalar function with derivatives f1 = f'(a.v), f2 = f''(a.v).
inline Jet apply_unary(const Jet& a, cplx f0, cplx f1, cplx f2) {
    Jet r(f0);
    if (a.is_constant()) return r;
    r.d = f1 * a.d;
    r.dd = f1 * a.dd + f2 * (a.d * a.d.transpose());
    return r;
}

}  // namespace detail

inline Jet operator+(Jet a, const Jet& b) {
    const auto n = detail::common_vars(a, b);
    a.v += b.v;
    if (n == 0) return a;
    detail::promote(a, n);
    if (!b.is_constant()) {
        a.d += b.d;
        a.dd += b.dd;
    }
    return a;
}

inline Jet operator-(const Jet& a) {
    Jet r(-a.v);
    if (!a.is_constant()) {
        r.d = -a.d;
        r.dd = -a.dd;
    }
    return r;
}

inline Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

inline Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.v * b.v);
    if (a.is_constant() && b.is_constant()) return r;
    if (a.is_constant()) {
        r.d = a.v * b.d;
        r.dd = a.v * b.dd;
        return r;
    }
    if (b.is_constant()) {
        r.d = b.v * a.d;
        r.dd = b.v * a.dd;
        return r;
    }
    r.d = a.v * b.d + b.v * a.d;
    const CMat cross = a.d * b.d.transpose();
    r.dd = a.v * b.dd + b.v * a.dd + cross + cross.transpose();
    return r;
}

inline Jet reciprocal(const Jet& a) {
    const cplx inv = 1.0 / a.v;
    return detail::apply_unary(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

inline Jet& operator+=(Jet& a, const Jet& b) { return a = a + b; }
inline Jet& operator*=(Jet& a, const Jet& b) { return a = a * b; }

inline cplx value_of(const cplx& x) { return x; }
inline cplx value_of(const Jet& x) { return x.v; }

}  // namespace chyp
