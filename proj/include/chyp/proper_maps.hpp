#pragma once

// Polynomial proper ball maps: catalog, evaluation, properness certificate,
// boundary Lipschitz constant, symmetry pairs and Siegel-coordinate conjugates.

#include <cstdint>
#include <string>
#include <vector>

#include "chyp/group.hpp"
#include "chyp/kobayashi.hpp"
#include "chyp/map_chain.hpp"
#include "chyp/polynomial.hpp"

namespace chyp {

namespace catalog {

/// z -> (z, 0) : B^m -> B^M.
ProperMapSpec linear(int m, int M);
/// (z_1, ..., z_{m-1}, z_1 z_m, ..., z_m z_m) : B^m -> B^{2m-1}; for m = 2 this
/// is (z1, z1 z2, z2^2). Used as the candidate fixture at M = 2m - 1.
ProperMapSpec whitney(int m = 2);
/// All degree-d monomials z^a with coefficient sqrt(d! / a!), so that
/// ||f(z)|| = ||z||^d. Components are in descending lexicographic order of a.
ProperMapSpec power(int m, int d);

}  // namespace catalog

/// Looks up "linear(m,M)", "whitney", "whitney(m)" or "power(m,d)".
ProperMapSpec catalog_map(const std::string& name);
/// Names understood by catalog_map, with a default parameter choice each.
std::vector<std::string> catalog_names();

/// e_1..e_m, then normalized e_i + e_j (i < j), then seeded random unit vectors.
std::vector<CVec> deterministic_directions(int m, int count, std::uint64_t seed = 0);

/// max |‖f(v)‖ - 1| over `samples` deterministic unit vectors v.
double properness_residual(const ProperMapSpec& f, int samples);
/// Validates the spec and requires properness_residual <= tol over at least
/// 32 m boundary samples. Throws InputError otherwise.
void certify_proper(const ProperMapSpec& f, double tol = 1e-9);

CVec evaluate(const ProperMapSpec& f, const CVec& z);
BallPoint evaluate(const ProperMapSpec& f, const BallPoint& z);

struct LipschitzEstimate {
    double C = 0.0;
    CVec argmax;
    int radial_levels = 0;
    int directions = 0;
    int grid_points() const { return radial_levels * directions; }
};

/// Grid maximum of (1 - ‖f(z)‖) / (1 - ‖z‖) over ‖z‖ = 1 - 10^{-s} with s on
/// a uniform grid in [1, 8] (7 density + 1 levels) and 64 density directions.
LipschitzEstimate lipschitz_boundary_constant(const ProperMapSpec& f, int density = 1);

/// ½ log(2C) + dist(0, f(0)). Rejects C below the coarse grid estimate of the
/// boundary constant, and C < 1 when f(0) = 0.
double beta_constant(const ProperMapSpec& f, double C);

struct SymmetryPair {
    Automorphism phi;
    Automorphism psi;
    double residual = 0.0;

    bool certified(double tol = 1e-9) const { return residual <= tol; }
};

/// max ‖ψ(f(z)) - f(φ(z))‖ over seeded random points with ‖z‖ <= 0.95.
SymmetryPair verify_symmetry_pair(const ProperMapSpec& f, const Automorphism& phi, const Automorphism& psi,
                                  int sample_count = 64, std::uint64_t seed = 0);
/// Same for a map given as a chain B^m -> B^M.
SymmetryPair verify_symmetry_pair(const MapChain& f, const Automorphism& phi, const Automorphism& psi,
                                  int sample_count = 64, std::uint64_t seed = 0);

/// φ acting on the first m coordinates of B^M, identity on the rest.
Automorphism block_extend(const Automorphism& phi, int M);

/// F_M o f o F_m^{-1} as a chain; jets follow from jet_at / jet_at_zero.
MapChain siegel_conjugate(const ProperMapSpec& f);

/// dist(f(t v), t f(v)).
double radial_deviation(const ProperMapSpec& f, const CVec& v, double t);

struct RadialSweepRow {
    int direction = 0;
    int k = 0;
    double t = 0.0;
    double deviation = 0.0;
};

struct RadialSweep {
    std::vector<RadialSweepRow> rows;
    double sup = 0.0;
    /// max over directions of |deviation(k_last) - deviation(k_ref)|, where
    /// k_ref is two steps below the last k (0 when fewer than three levels).
    double stabilization = 0.0;
    RadialBoundConstants constants;
    bool bound_respected() const { return sup <= constants.bound(); }
};

/// Deviation over the given directions and t = 1 - 10^{-k} for k in ks.
/// `constants` supplies C and D; base_offset is filled in from f(0).
RadialSweep radial_sweep(const ProperMapSpec& f, const std::vector<CVec>& directions, const std::vector<int>& ks,
                         RadialBoundConstants constants);

}  // namespace chyp
