#pragma once

// PU(m,1) acting on the unit ball, the Siegel (parabolic) model, and the
// Cayley transforms between them.

#include <vector>

#include "chyp/common.hpp"

namespace chyp {

/// A point of the closed unit ball in C^m.
///
/// Besides the coordinates the point carries gap() = 1 - ||z||^2. Operations
/// that know this quantity in closed form (automorphism images, radial
/// geodesics, Cayley images) propagate it instead of recomputing it from
/// rounded coordinates, which keeps distances accurate at ||z|| ~ 1 - 1e-10.
class BallPoint {
public:
    explicit BallPoint(CVec coords, double tol_closure = default_tolerances().closure);

    /// Trusted constructor: gap is 1 - ||coords||^2 computed by the caller.
    static BallPoint with_gap(CVec coords, double gap);
    /// Trusted constructor for a point known to more than double precision:
    /// the exact point is coords + correction, with |correction| ~ eps |coords|.
    /// Only distance computations read the correction; it keeps differences
    /// of nearby points accurate when both sit close to the sphere.
    static BallPoint with_correction(CVec coords, CVec correction, double gap);
    static BallPoint origin(int m);
    static BallPoint basis(int m, int index);

    int dim() const { return static_cast<int>(coords_.size()); }
    const CVec& coords() const { return coords_; }
    /// Empty unless built by with_correction().
    const CVec& correction() const { return correction_; }
    double gap() const { return gap_; }
    double norm() const { return coords_.norm(); }
    bool is_interior() const { return gap_ > 0.0; }
    /// artanh(||z||), i.e. the Kobayashi distance from the origin.
    double radial_time() const;

private:
    BallPoint(CVec coords, double gap, int);
    CVec coords_;
    CVec correction_;
    double gap_;
};

/// A point of the closed Siegel domain {Im z1 >= sum_{k>=2} |z_k|^2}.
/// rho() is the defining function Im z1 - sum_{k>=2}|z_k|^2.
class SiegelPoint {
public:
    explicit SiegelPoint(CVec coords, double tol_closure = default_tolerances().closure);
    static SiegelPoint with_rho(CVec coords, double rho);

    int dim() const { return static_cast<int>(coords_.size()); }
    const CVec& coords() const { return coords_; }
    double rho() const { return rho_; }
    bool is_interior() const { return rho_ > 0.0; }

private:
    SiegelPoint(CVec coords, double rho, int);
    CVec coords_;
    double rho_;
};

/// Defining function of the Siegel domain evaluated from coordinates.
double siegel_defining_function(const CVec& z);

/// An element of PU(m,1), stored as an (m+1)x(m+1) matrix [[A, b], [c^T, d]]
/// acting by z -> (Az + b) / (c^T z + d).
///
/// The projective S^1 ambiguity is fixed by scaling the matrix so that the
/// largest-modulus entry of the last row is real and positive. For members of
/// U(m,1) that entry is always d, since |d|^2 = 1 + ||c||^2.
class Automorphism {
public:
    explicit Automorphism(CMat matrix);
    static Automorphism identity(int m);

    int dim() const { return static_cast<int>(matrix_.rows()) - 1; }
    const CMat& matrix() const { return matrix_; }

    CMat linear_block() const { return matrix_.topLeftCorner(dim(), dim()); }
    CVec translation() const { return matrix_.topRightCorner(dim(), 1); }
    CVec denominator_row() const { return matrix_.bottomLeftCorner(1, dim()).transpose(); }
    cplx corner() const { return matrix_(dim(), dim()); }

private:
    CMat matrix_;
};

/// [z, w]_{m,1} = z_1 conj(w_1) + ... + z_m conj(w_m) - z_{m+1} conj(w_{m+1}).
cplx hermitian_form(const CVec& z, const CVec& w);

/// J = diag(1, ..., 1, -1) of size m+1.
CMat form_matrix(int m);

/// ||g* J g - J||_F. This is an absolute residual: for a member with large
/// translation part the rounding floor grows like eps * ||g||^2, see
/// membership_tolerance().
double verify_membership(const Automorphism& g);

/// Tolerance at which verify_membership() certifies g, scaled by ||g||_2^2 so
/// that rounded matrices of far-translating elements are not rejected.
double membership_tolerance(const Automorphism& g, double tol_group = default_tolerances().group);
bool is_member(const Automorphism& g, double tol_group = default_tolerances().group);

BallPoint apply_ball(const Automorphism& g, const BallPoint& z);
/// g(0) = b / d with gap 1 / |d|^2.
BallPoint origin_image(const Automorphism& g);

/// a_t: cosh/sinh corner blocks, identity on coordinates 2..m.
Automorphism cartan(double t, int m);

/// Unitary k (block diagonal, fixing 0) with k(e1) = v. Columns after the first
/// are obtained by Gram-Schmidt over e1, ..., em, skipping candidates whose
/// residual norm is below 1e-8.
Automorphism rotation_mapping_e1(const CVec& v, double tol_closure = default_tolerances().closure);

/// n x n unitary whose leading columns orthonormalize `columns` and whose
/// remaining columns complete them from the standard basis, in order.
/// Throws NumericError if fewer than n independent directions are found.
CMat unitary_completion(const CMat& columns, int n, double skip_threshold = 1e-8);

/// Block-diagonal automorphism diag(U, 1) for a unitary U.
Automorphism unitary_automorphism(const CMat& unitary);

/// g with g(p) = 0, built as (k a_t)^{-1} with t = artanh ||p|| and
/// k = rotation_mapping_e1(p / ||p||).
Automorphism transport_to_origin(const BallPoint& p);

Automorphism compose(const Automorphism& g, const Automorphism& h);
/// J g* J, the inverse of any element of U(m,1).
Automorphism inverse(const Automorphism& g);

/// Largest entrywise difference after canonical normalization.
double distance(const Automorphism& g, const Automorphism& h);

/// F_m(z) = (i(1-z1)/(1+z1), z2/(1+z1), ..., zm/(1+z1)).
SiegelPoint cayley_to_siegel(const BallPoint& z);
/// F_m^{-1}(w) = ((i-w1)/(w1+i), 2i w2/(w1+i), ..., 2i wm/(w1+i)), so that F_m^{-1}(0) = e1.
BallPoint cayley_to_ball(const SiegelPoint& w);

/// (e^{-t} z1, e^{-t/2} z2, ..., e^{-t/2} zm).
///
/// Note on the parameter: F_m o a_t o F_m^{-1} equals cartan_siegel(2t, .),
/// not cartan_siegel(t, .). The ball flow a_t translates the origin by
/// Kobayashi distance t, and F_m(a_t(0)) = (i e^{-2t}, 0, ..., 0).
SiegelPoint cartan_siegel(double t, const SiegelPoint& z);

/// The Siegel-model conjugate of the ball Cartan element a_t.
inline SiegelPoint cartan_siegel_of_ball(double t, const SiegelPoint& z) {
    return cartan_siegel(2.0 * t, z);
}

/// Modulus below which the Cayley denominators 1 + z1 and w1 + i are treated
/// as vanishing.
inline constexpr double kCayleyExcludedRadius = 1e-300;

}  // namespace chyp
