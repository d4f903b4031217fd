#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace chyp {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr cplx kI{0.0, 1.0};

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments: wrong dimensions, points outside the closed domain, bad files.
class InputError : public Error {
public:
    using Error::Error;
};

/// A computation that is well posed in exact arithmetic failed numerically
/// (vanishing denominator, excluded Cayley point, derivative mismatch).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Default tolerances. tol_group bounds ||g*Jg - J|| for group membership,
/// tol_closure is the slack allowed when testing membership in a closed domain.
struct Tolerances {
    double group = 1e-10;
    double closure = 1e-9;
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

// Error-free transformations used by the near-boundary kernels.
namespace accurate {

inline std::pair<double, double> two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline std::pair<double, double> two_prod(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

/// Double-double accumulator; add() is exact up to the final rounding of hi+lo.
struct Accumulator {
    double hi = 0.0;
    double lo = 0.0;

    void add(double x) {
        auto [s, e] = two_sum(hi, x);
        hi = s;
        lo += e;
    }
    void add_product(double a, double b) {
        auto [p, e] = two_prod(a, b);
        add(p);
        lo += e;
    }
    void sub_product(double a, double b) {
        auto [p, e] = two_prod(a, b);
        add(-p);
        lo -= e;
    }
    double value() const { return hi + lo; }
};

}  // namespace accurate

/// 1 - ||z||^2 evaluated with compensated summation.
template <class Derived>
double one_minus_norm_sq(const Eigen::MatrixBase<Derived>& z) {
    accurate::Accumulator acc;
    acc.add(1.0);
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        const cplx c = z(k);
        acc.sub_product(c.real(), c.real());
        acc.sub_product(c.imag(), c.imag());
    }
    return acc.value();
}

/// |a|^2 - ||b||^2 with compensated summation.
template <class Derived>
double abs_sq_minus_norm_sq(cplx a, const Eigen::MatrixBase<Derived>& b) {
    accurate::Accumulator acc;
    acc.add_product(a.real(), a.real());
    acc.add_product(a.imag(), a.imag());
    for (Eigen::Index k = 0; k < b.size(); ++k) {
        const cplx c = b(k);
        acc.sub_product(c.real(), c.real());
        acc.sub_product(c.imag(), c.imag());
    }
    return acc.value();
}

/// SplitMix64 step, used to derive independent per-task seeds from a run seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double max_abs(const CMat& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

}  // namespace chyp
