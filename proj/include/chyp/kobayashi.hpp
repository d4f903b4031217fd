#pragma once

// Kobayashi distance on the unit ball, radial geodesics, sampled
// quasi-geodesics and Hausdorff pseudo-distances, and the empirical Morse
// constant estimator.

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "chyp/group.hpp"

namespace chyp {

/// Kobayashi distance on B^m. Returns +infinity when either point lies on the
/// unit sphere; throws InputError on a dimension mismatch.
///
/// Evaluated as asinh(sqrt(N / ((1-|z|^2)(1-|w|^2)))) with
/// N = |P_z(w-z)|^2 + (1-|z|^2) |Q_z(w-z)|^2, where P_z and Q_z project onto
/// and orthogonally to z. This is the closed-form cosh^{-1} expression
/// rewritten without cancellation; both gaps come from the points themselves.
double dist_ball(const BallPoint& z, const BallPoint& w);

/// Same, on raw coordinates (gaps recomputed with compensated sums).
double dist_ball(const CVec& z, const CVec& w);

/// Distance between points of the Siegel domain, pulled back through F_m^{-1}.
double dist_siegel(const SiegelPoint& z, const SiegelPoint& w);

enum class CurveModel { ball, siegel };

/// A curve sampled at strictly increasing parameters (geodesic-time units).
class SampledCurve {
public:
    SampledCurve(std::vector<double> params, std::vector<BallPoint> points);
    SampledCurve(std::vector<double> params, std::vector<SiegelPoint> points);

    CurveModel model() const { return std::holds_alternative<std::vector<BallPoint>>(points_) ? CurveModel::ball : CurveModel::siegel; }
    std::size_t size() const { return params_.size(); }
    const std::vector<double>& params() const { return params_; }
    const std::vector<BallPoint>& ball_points() const;
    const std::vector<SiegelPoint>& siegel_points() const;

private:
    std::vector<double> params_;
    std::variant<std::vector<BallPoint>, std::vector<SiegelPoint>> points_;
};

/// Converts a Siegel-model curve to the ball model through F_m^{-1}.
SampledCurve to_ball_model(const SampledCurve& curve);

/// sigma_v(t) = tanh(t) v.
SampledCurve radial_geodesic(const CVec& v, const std::vector<double>& t_values);

/// Geodesic from p to q (parameter 0 at p), sampled at the given times.
SampledCurve geodesic_between(const BallPoint& p, const BallPoint& q, const std::vector<double>& t_values);

struct QuasiGeodesicCertificate {
    double alpha = 1.0;
    double beta = 0.0;
    /// Worst signed violation over sampled pairs; <= 0 iff the sampled
    /// inequalities (1/alpha)|t-s| - beta <= d <= alpha|t-s| + beta all hold.
    double max_violation = 0.0;
    std::pair<double, double> worst_pair{0.0, 0.0};

    bool certified(double tolerance = 0.0) const { return max_violation <= tolerance; }
};

QuasiGeodesicCertificate certify_quasi_geodesic(const SampledCurve& curve, double alpha, double beta);

struct HausdorffEstimate {
    double value = 0.0;
    /// The continuous pseudo-distance lies in [value - slack, value + slack].
    double slack = 0.0;
};

HausdorffEstimate hausdorff_pseudo_distance(const SampledCurve& a, const SampledCurve& b);

/// Largest distance between consecutive samples.
double max_adjacent_distance(const SampledCurve& curve);

struct MorseOptions {
    double step = 0.05;
    double min_length = 2.0;
    double max_length = 6.0;
    int max_pieces = 6;
    int max_attempts = 20;
};

struct MorseEstimate {
    double D = 0.0;
    double slack = 0.0;
    int trials = 0;
    int rejected = 0;
};

/// Empirical lower estimate of the Morse constant D(m, alpha, beta, R): the
/// sample maximum, over seeded random (alpha, beta)-quasi-geodesics, of the
/// Hausdorff pseudo-distance to a geodesic whose endpoints lie within R of
/// the quasi-geodesic's endpoints.
///
/// Quasi-geodesics are geodesic segments reparametrized by piecewise-linear
/// maps with slopes in [1/alpha, alpha], each sample displaced by Kobayashi
/// distance at most beta/2 in a random direction, and certified before use.
/// The random draws do not depend on alpha, beta or R, so estimates for
/// different parameters with the same seed use nested perturbations.
MorseEstimate estimate_morse_constant(int m, double alpha, double beta, double R, int trials, std::uint64_t seed,
                                      const MorseOptions& options = {});

/// Constants of the radial-line bound dist(f(tv), t f(v)) <= 2D + beta + dist(0, f(0)).
struct RadialBoundConstants {
    double C = 1.0;
    double D = 0.0;
    double base_offset = 0.0;

    double beta() const;
    double bound() const { return 2.0 * D + beta() + base_offset; }
};

/// Point at Kobayashi distance r from p in the direction of the unit vector u,
/// i.e. transport_to_origin(p)^{-1}(tanh(r) u).
BallPoint displace(const BallPoint& p, const CVec& u, double r);

}  // namespace chyp
