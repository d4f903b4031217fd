#include "chyp/group.hpp"

#include <algorithm>
#include <string>

namespace chyp {

namespace {

void require_dim(bool ok, const char* what) {
    if (!ok) throw InputError(what);
}

}  // namespace

// ---------------------------------------------------------------------------
// Points

BallPoint::BallPoint(CVec coords, double gap, int) : coords_(std::move(coords)), gap_(gap) {}

BallPoint::BallPoint(CVec coords, double tol_closure) : coords_(std::move(coords)) {
    require_dim(coords_.size() >= 1, "BallPoint: dimension must be positive");
    gap_ = one_minus_norm_sq(coords_);
    if (!std::isfinite(gap_)) throw InputError("BallPoint: non-finite coordinates");
    // ||z|| <= 1 + tol  <=>  1 - ||z||^2 >= -(2 tol + tol^2)
    if (gap_ < -(2.0 * tol_closure + tol_closure * tol_closure))
        throw InputError("BallPoint: point lies outside the closed unit ball (||z|| = " +
                         std::to_string(coords_.norm()) + ")");
}

BallPoint BallPoint::with_gap(CVec coords, double gap) { return BallPoint(std::move(coords), gap, 0); }

BallPoint BallPoint::with_correction(CVec coords, CVec correction, double gap) {
    if (correction.size() != coords.size()) throw InputError("BallPoint: correction dimension mismatch");
    BallPoint p(std::move(coords), gap, 0);
    p.correction_ = std::move(correction);
    return p;
}

BallPoint BallPoint::origin(int m) {
    require_dim(m >= 1, "BallPoint: dimension must be positive");
    return BallPoint(CVec::Zero(m), 1.0, 0);
}

BallPoint BallPoint::basis(int m, int index) {
    require_dim(m >= 1 && index >= 0 && index < m, "BallPoint::basis: index out of range");
    CVec e = CVec::Zero(m);
    e(index) = 1.0;
    return BallPoint(std::move(e), 0.0, 0);
}

double BallPoint::radial_time() const {
    if (gap_ <= 0.0) return std::numeric_limits<double>::infinity();
    const double r = coords_.norm();
    // artanh r = 1/2 log((1+r)^2 / (1 - r^2))
    return std::log1p(r) - 0.5 * std::log(gap_);
}

SiegelPoint::SiegelPoint(CVec coords, double rho, int) : coords_(std::move(coords)), rho_(rho) {}

SiegelPoint::SiegelPoint(CVec coords, double tol_closure) : coords_(std::move(coords)) {
    require_dim(coords_.size() >= 1, "SiegelPoint: dimension must be positive");
    rho_ = siegel_defining_function(coords_);
    if (!std::isfinite(rho_)) throw InputError("SiegelPoint: non-finite coordinates");
    if (rho_ < -tol_closure) throw InputError("SiegelPoint: point lies outside the closed Siegel domain");
}

SiegelPoint SiegelPoint::with_rho(CVec coords, double rho) { return SiegelPoint(std::move(coords), rho, 0); }

double siegel_defining_function(const CVec& z) {
    accurate::Accumulator acc;
    acc.add(z(0).imag());
    for (Eigen::Index k = 1; k < z.size(); ++k) {
        acc.sub_product(z(k).real(), z(k).real());
        acc.sub_product(z(k).imag(), z(k).imag());
    }
    return acc.value();
}

// ---------------------------------------------------------------------------
// Automorphisms

Automorphism::Automorphism(CMat matrix) : matrix_(std::move(matrix)) {
    require_dim(matrix_.rows() == matrix_.cols() && matrix_.rows() >= 2,
                "Automorphism: matrix must be square of size m+1 >= 2");
    if (!matrix_.allFinite()) throw InputError("Automorphism: non-finite matrix entry");
    const Eigen::Index last = matrix_.rows() - 1;
    Eigen::Index pivot = last;
    double best = std::abs(matrix_(last, last));
    for (Eigen::Index j = 0; j < last; ++j) {
        const double a = std::abs(matrix_(last, j));
        if (a > best) {
            best = a;
            pivot = j;
        }
    }
    if (best == 0.0) throw InputError("Automorphism: last row vanishes");
    const cplx entry = matrix_(last, pivot);
    matrix_ *= std::conj(entry) / best;
    matrix_(last, pivot) = best;
}

Automorphism Automorphism::identity(int m) {
    require_dim(m >= 1, "Automorphism: dimension must be positive");
    return Automorphism(CMat::Identity(m + 1, m + 1));
}

cplx hermitian_form(const CVec& z, const CVec& w) {
    if (z.size() != w.size()) throw InputError("hermitian_form: dimension mismatch");
    if (z.size() < 2) throw InputError("hermitian_form: vectors must have length >= 2");
    const Eigen::Index n = z.size() - 1;
    cplx s{0.0, 0.0};
    for (Eigen::Index k = 0; k < n; ++k) s += z(k) * std::conj(w(k));
    return s - z(n) * std::conj(w(n));
}

CMat form_matrix(int m) {
    CMat J = CMat::Identity(m + 1, m + 1);
    J(m, m) = -1.0;
    return J;
}

double verify_membership(const Automorphism& g) {
    const CMat J = form_matrix(g.dim());
    return (g.matrix().adjoint() * J * g.matrix() - J).norm();
}

double membership_tolerance(const Automorphism& g, double tol_group) {
    const double s = Eigen::JacobiSVD<CMat>(g.matrix()).singularValues()(0);
    return tol_group * std::max(1.0, s * s);
}

bool is_member(const Automorphism& g, double tol_group) {
    return verify_membership(g) <= membership_tolerance(g, tol_group);
}

BallPoint apply_ball(const Automorphism& g, const BallPoint& z) {
    if (z.dim() != g.dim()) throw InputError("apply_ball: dimension mismatch");
    const int m = g.dim();
    const CMat& G = g.matrix();
    const cplx den = (G.row(m).head(m) * z.coords())(0) + G(m, m);
    if (std::abs(den) == 0.0 || !std::isfinite(std::abs(den)))
        throw NumericError("apply_ball: vanishing denominator c^T z + d");
    CVec w = (G.topLeftCorner(m, m) * z.coords() + G.col(m).head(m)) / den;
    // For g in U(m,1): 1 - ||g(z)||^2 = (1 - ||z||^2) / |c^T z + d|^2.
    return BallPoint::with_gap(std::move(w), z.gap() / std::norm(den));
}

BallPoint origin_image(const Automorphism& g) {
    const cplx d = g.corner();
    return BallPoint::with_gap(g.translation() / d, 1.0 / std::norm(d));
}

Automorphism cartan(double t, int m) {
    require_dim(m >= 1, "cartan: dimension must be positive");
    CMat a = CMat::Identity(m + 1, m + 1);
    a(0, 0) = std::cosh(t);
    a(m, m) = std::cosh(t);
    a(0, m) = std::sinh(t);
    a(m, 0) = std::sinh(t);
    return Automorphism(std::move(a));
}

CMat unitary_completion(const CMat& columns, int n, double skip_threshold) {
    if (columns.rows() != n) throw InputError("unitary_completion: row count mismatch");
    CMat basis(n, n);
    int found = 0;
    auto try_add = [&](CVec v) {
        if (found == n) return;
        const double original = v.norm();
        if (original == 0.0) return;
        // Modified Gram-Schmidt, applied twice for orthogonality to working precision.
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j < found; ++j) v -= basis.col(j).dot(v) * basis.col(j);
        const double r = v.norm();
        if (r < skip_threshold) return;
        basis.col(found++) = v / r;
    };
    for (Eigen::Index j = 0; j < columns.cols(); ++j) {
        const int before = found;
        try_add(columns.col(j));
        if (found == before)
            throw NumericError("unitary_completion: leading columns are linearly dependent");
    }
    for (int k = 0; k < n && found < n; ++k) try_add(CVec::Unit(n, k));
    if (found < n) throw NumericError("unitary_completion: could not complete to a basis");
    return basis;
}

Automorphism unitary_automorphism(const CMat& unitary) {
    const auto m = unitary.rows();
    CMat g = CMat::Identity(m + 1, m + 1);
    g.topLeftCorner(m, m) = unitary;
    return Automorphism(std::move(g));
}

Automorphism rotation_mapping_e1(const CVec& v, double tol_closure) {
    require_dim(v.size() >= 1, "rotation_mapping_e1: empty vector");
    if (std::abs(v.norm() - 1.0) > tol_closure)
        throw InputError("rotation_mapping_e1: vector is not a unit vector");
    const int m = static_cast<int>(v.size());
    CMat k = unitary_completion(v / v.norm(), m);
    // k(e1) = v exactly, not merely up to the renormalization rounding.
    k.col(0) = v;
    return unitary_automorphism(k);
}

Automorphism transport_to_origin(const BallPoint& p) {
    if (!p.is_interior()) throw InputError("transport_to_origin: point must lie in the open ball");
    const double r = p.norm();
    if (r == 0.0) return Automorphism::identity(p.dim());
    const Automorphism k = rotation_mapping_e1(p.coords() / r);
    return inverse(compose(k, cartan(p.radial_time(), p.dim())));
}

Automorphism compose(const Automorphism& g, const Automorphism& h) {
    if (g.dim() != h.dim()) throw InputError("compose: dimension mismatch");
    return Automorphism(g.matrix() * h.matrix());
}

Automorphism inverse(const Automorphism& g) {
    const CMat J = form_matrix(g.dim());
    return Automorphism(J * g.matrix().adjoint() * J);
}

double distance(const Automorphism& g, const Automorphism& h) {
    if (g.dim() != h.dim()) throw InputError("distance: dimension mismatch");
    return max_abs(g.matrix() - h.matrix());
}

// ---------------------------------------------------------------------------
// Cayley transforms

SiegelPoint cayley_to_siegel(const BallPoint& z) {
    const CVec& c = z.coords();
    const cplx den = 1.0 + c(0);
    if (std::abs(den) <= kCayleyExcludedRadius)
        throw NumericError("cayley_to_siegel: undefined at the excluded boundary point z1 = -1");
    CVec w(c.size());
    w(0) = kI * (1.0 - c(0)) / den;
    for (Eigen::Index k = 1; k < c.size(); ++k) w(k) = c(k) / den;
    // rho(F(z)) = (1 - ||z||^2) / |1 + z1|^2
    return SiegelPoint::with_rho(std::move(w), z.gap() / std::norm(den));
}

BallPoint cayley_to_ball(const SiegelPoint& w) {
    const CVec& c = w.coords();
    const cplx den = c(0) + kI;
    if (std::abs(den) <= kCayleyExcludedRadius)
        throw NumericError("cayley_to_ball: undefined at the excluded point z1 = -i");
    CVec z(c.size());
    z(0) = (kI - c(0)) / den;
    for (Eigen::Index k = 1; k < c.size(); ++k) z(k) = 2.0 * kI * c(k) / den;
    // 1 - ||F^{-1}(w)||^2 = 4 rho(w) / |w1 + i|^2
    return BallPoint::with_gap(std::move(z), 4.0 * w.rho() / std::norm(den));
}

SiegelPoint cartan_siegel(double t, const SiegelPoint& z) {
    CVec w = z.coords();
    const double full = std::exp(-t);
    const double half = std::exp(-0.5 * t);
    w(0) *= full;
    for (Eigen::Index k = 1; k < w.size(); ++k) w(k) *= half;
    return SiegelPoint::with_rho(std::move(w), full * z.rho());
}

}  // namespace chyp
