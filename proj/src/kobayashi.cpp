#include "chyp/kobayashi.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "chyp/parallel.hpp"

namespace chyp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Orders the pair so that dist_ball is exactly symmetric: the point nearer the
// origin (larger gap) serves as the projection base.
bool base_first(const CVec& a, double ga, const CVec& b, double gb) {
    if (ga != gb) return ga > gb;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        if (a(k).real() != b(k).real()) return a(k).real() < b(k).real();
        if (a(k).imag() != b(k).imag()) return a(k).imag() < b(k).imag();
    }
    return true;
}

double dist_core(const BallPoint& zp, const BallPoint& wp) {
    const CVec& z = zp.coords();
    const CVec& w = wp.coords();
    const double gz = zp.gap();
    const double gw = wp.gap();
    if (!(gz > 0.0) || !(gw > 0.0)) return kInf;
    const Eigen::Index m = z.size();
    CVec delta = w - z;
    if (zp.correction().size()) delta -= zp.correction();
    if (wp.correction().size()) delta += wp.correction();
    const double nz2 = z.squaredNorm();
    double numerator = 0.0;
    if (nz2 == 0.0) {
        numerator = delta.squaredNorm();
    } else {
        cplx p{0.0, 0.0};
        for (Eigen::Index k = 0; k < m; ++k) p += delta(k) * std::conj(z(k));
        const cplx c = p / nz2;
        double q2 = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) q2 += std::norm(delta(k) - c * z(k));
        numerator = std::norm(p) / nz2 + gz * q2;
    }
    return std::asinh(std::sqrt(numerator) / (std::sqrt(gz) * std::sqrt(gw)));
}

// tanh(t) u carried as a double-double: hi + lo, with tanh t = 1 - eps split
// exactly and the products with u corrected by fma.
BallPoint radial_point(const CVec& u, double t, double gap) {
    double th = std::tanh(t);
    double th_lo = 0.0;
    if (t > 0.55) {
        const double eps = 2.0 / (std::exp(2.0 * t) + 1.0);
        th = 1.0 - eps;
        th_lo = (1.0 - th) - eps;
    }
    CVec hi(u.size()), lo(u.size());
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        const double re = th * u(k).real();
        const double im = th * u(k).imag();
        hi(k) = cplx(re, im);
        lo(k) = cplx(std::fma(th, u(k).real(), -re) + th_lo * u(k).real(),
                     std::fma(th, u(k).imag(), -im) + th_lo * u(k).imag());
    }
    return BallPoint::with_correction(std::move(hi), std::move(lo), gap);
}

CVec random_unit(std::mt19937_64& rng, int m) {
    std::normal_distribution<double> normal;
    CVec u(m);
    for (;;) {
        for (int k = 0; k < m; ++k) u(k) = cplx(normal(rng), normal(rng));
        const double n = u.norm();
        if (n > 1e-12) return u / n;
    }
}

void check_params(const std::vector<double>& params, std::size_t count) {
    if (params.size() != count) throw InputError("SampledCurve: params and points differ in length");
    if (params.empty()) throw InputError("SampledCurve: empty curve");
    for (std::size_t i = 1; i < params.size(); ++i)
        if (!(params[i] > params[i - 1])) throw InputError("SampledCurve: params must be strictly increasing");
}

}  // namespace

double dist_ball(const BallPoint& z, const BallPoint& w) {
    if (z.dim() != w.dim()) throw InputError("dist_ball: dimension mismatch");
    if (base_first(z.coords(), z.gap(), w.coords(), w.gap())) return dist_core(z, w);
    return dist_core(w, z);
}

double dist_ball(const CVec& z, const CVec& w) { return dist_ball(BallPoint(z), BallPoint(w)); }

double dist_siegel(const SiegelPoint& z, const SiegelPoint& w) {
    return dist_ball(cayley_to_ball(z), cayley_to_ball(w));
}

// ---------------------------------------------------------------------------
// Curves

SampledCurve::SampledCurve(std::vector<double> params, std::vector<BallPoint> points)
    : params_(std::move(params)) {
    check_params(params_, points.size());
    for (const auto& p : points) {
        if (p.dim() != points.front().dim()) throw InputError("SampledCurve: mixed dimensions");
        if (!p.is_interior()) throw InputError("SampledCurve: points must lie in the open ball");
    }
    points_ = std::move(points);
}

SampledCurve::SampledCurve(std::vector<double> params, std::vector<SiegelPoint> points)
    : params_(std::move(params)) {
    check_params(params_, points.size());
    for (const auto& p : points) {
        if (p.dim() != points.front().dim()) throw InputError("SampledCurve: mixed dimensions");
        if (!p.is_interior()) throw InputError("SampledCurve: points must lie in the open Siegel domain");
    }
    points_ = std::move(points);
}

const std::vector<BallPoint>& SampledCurve::ball_points() const {
    if (model() != CurveModel::ball) throw InputError("SampledCurve: curve is in the Siegel model");
    return std::get<std::vector<BallPoint>>(points_);
}

const std::vector<SiegelPoint>& SampledCurve::siegel_points() const {
    if (model() != CurveModel::siegel) throw InputError("SampledCurve: curve is in the ball model");
    return std::get<std::vector<SiegelPoint>>(points_);
}

SampledCurve to_ball_model(const SampledCurve& curve) {
    if (curve.model() == CurveModel::ball) return curve;
    std::vector<BallPoint> pts;
    pts.reserve(curve.size());
    for (const auto& p : curve.siegel_points()) pts.push_back(cayley_to_ball(p));
    return SampledCurve(curve.params(), std::move(pts));
}

SampledCurve radial_geodesic(const CVec& v, const std::vector<double>& t_values) {
    if (std::abs(v.norm() - 1.0) > default_tolerances().closure)
        throw InputError("radial_geodesic: direction must be a unit vector");
    const CVec u = v / v.norm();
    std::vector<BallPoint> pts;
    pts.reserve(t_values.size());
    for (double t : t_values) {
        if (t < 0.0) throw InputError("radial_geodesic: times must be non-negative");
        const double c = std::cosh(t);
        pts.push_back(radial_point(u, t, 1.0 / (c * c)));
    }
    return SampledCurve(t_values, std::move(pts));
}

BallPoint displace(const BallPoint& p, const CVec& u, double r) {
    const Automorphism back = inverse(transport_to_origin(p));
    const double c = std::cosh(r);
    return apply_ball(back, BallPoint::with_gap(std::tanh(r) * (u / u.norm()), 1.0 / (c * c)));
}

SampledCurve geodesic_between(const BallPoint& p, const BallPoint& q, const std::vector<double>& t_values) {
    if (p.dim() != q.dim()) throw InputError("geodesic_between: dimension mismatch");
    const Automorphism to_origin = transport_to_origin(p);
    const Automorphism back = inverse(to_origin);
    const BallPoint q0 = apply_ball(to_origin, q);
    CVec u = CVec::Unit(p.dim(), 0);
    if (q0.norm() > 0.0) u = q0.coords() / q0.norm();
    std::vector<BallPoint> pts;
    pts.reserve(t_values.size());
    for (double t : t_values) {
        const double c = std::cosh(t);
        pts.push_back(apply_ball(back, BallPoint::with_gap(std::tanh(t) * u, 1.0 / (c * c))));
    }
    return SampledCurve(t_values, std::move(pts));
}

QuasiGeodesicCertificate certify_quasi_geodesic(const SampledCurve& curve, double alpha, double beta) {
    if (curve.size() < 2) throw InputError("certify_quasi_geodesic: need at least two samples");
    if (alpha < 1.0 || beta < 0.0) throw InputError("certify_quasi_geodesic: need alpha >= 1 and beta >= 0");
    const SampledCurve ball = to_ball_model(curve);
    const auto& pts = ball.ball_points();
    const auto& t = ball.params();
    const std::size_t n = pts.size();

    struct RowWorst {
        double violation = -kInf;
        std::size_t j = 0;
    };
    std::vector<RowWorst> rows(n);
    parallel_for(n, [&](std::size_t i) {
        RowWorst best;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double gap = t[j] - t[i];
            const double d = dist_ball(pts[i], pts[j]);
            const double lower = gap / alpha - beta - d;
            const double upper = d - alpha * gap - beta;
            const double v = std::max(lower, upper);
            if (v > best.violation) best = {v, j};
        }
        rows[i] = best;
    });

    QuasiGeodesicCertificate cert;
    cert.alpha = alpha;
    cert.beta = beta;
    cert.max_violation = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].violation > cert.max_violation) {
            cert.max_violation = rows[i].violation;
            cert.worst_pair = {t[i], t[rows[i].j]};
        }
    }
    return cert;
}

double max_adjacent_distance(const SampledCurve& curve) {
    const SampledCurve ball = to_ball_model(curve);
    const auto& pts = ball.ball_points();
    double worst = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) worst = std::max(worst, dist_ball(pts[i - 1], pts[i]));
    return worst;
}

HausdorffEstimate hausdorff_pseudo_distance(const SampledCurve& a, const SampledCurve& b) {
    if (a.model() != b.model()) throw InputError("hausdorff_pseudo_distance: curves are in different models");
    const SampledCurve ba = to_ball_model(a);
    const SampledCurve bb = to_ball_model(b);
    const auto& pa = ba.ball_points();
    const auto& pb = bb.ball_points();
    if (pa.front().dim() != pb.front().dim()) throw InputError("hausdorff_pseudo_distance: dimension mismatch");

    std::vector<double> row_min(pa.size(), kInf);
    std::vector<std::vector<double>> col_min_partial(pa.size());
    parallel_for(pa.size(), [&](std::size_t i) {
        auto& cols = col_min_partial[i];
        cols.resize(pb.size());
        double best = kInf;
        for (std::size_t j = 0; j < pb.size(); ++j) {
            const double d = dist_ball(pa[i], pb[j]);
            cols[j] = d;
            best = std::min(best, d);
        }
        row_min[i] = best;
    });
    double a_to_b = 0.0;
    for (double v : row_min) a_to_b = std::max(a_to_b, v);
    double b_to_a = 0.0;
    for (std::size_t j = 0; j < pb.size(); ++j) {
        double best = kInf;
        for (std::size_t i = 0; i < pa.size(); ++i) best = std::min(best, col_min_partial[i][j]);
        b_to_a = std::max(b_to_a, best);
    }
    HausdorffEstimate h;
    h.value = std::max(a_to_b, b_to_a);
    h.slack = std::max(max_adjacent_distance(ba), max_adjacent_distance(bb));
    return h;
}

// ---------------------------------------------------------------------------
// Morse constant

namespace {

struct MorseTrial {
    double value = 0.0;
    double slack = 0.0;
    int rejected = 0;
};

MorseTrial run_morse_trial(int m, double alpha, double beta, double R, std::uint64_t seed,
                           const MorseOptions& opt) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    MorseTrial out;
    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        // Reference geodesic gamma(tau), tau in [0, L], through a random base point.
        const double u0 = 1.5 * unif(rng);
        const double c0 = std::cosh(u0);
        const BallPoint x0 = BallPoint::with_gap(std::tanh(u0) * random_unit(rng, m), 1.0 / (c0 * c0));
        const CVec direction = random_unit(rng, m);
        const double length = opt.min_length + (opt.max_length - opt.min_length) * unif(rng);
        const Automorphism back = inverse(transport_to_origin(x0));
        auto gamma = [&](double tau) {
            const double c = std::cosh(tau);
            return apply_ball(back, BallPoint::with_gap(std::tanh(tau) * direction, 1.0 / (c * c)));
        };

        // Piecewise-linear reparametrization with slopes in [1/alpha, alpha].
        const int pieces = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(opt.max_pieces));
        std::vector<double> cuts{0.0, length};
        for (int i = 1; i < pieces; ++i) cuts.push_back(length * unif(rng));
        std::sort(cuts.begin(), cuts.end());
        std::vector<double> slopes(cuts.size() - 1);
        for (auto& s : slopes) s = std::pow(alpha, 2.0 * unif(rng) - 1.0);
        std::vector<double> s_knots{0.0};
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) s_knots.push_back(s_knots.back() + (cuts[i + 1] - cuts[i]) / slopes[i]);
        const double total = s_knots.back();
        const int intervals = std::max(1, static_cast<int>(std::ceil(total / opt.step)));

        std::vector<double> params;
        std::vector<BallPoint> pts;
        params.reserve(intervals + 1);
        pts.reserve(intervals + 1);
        std::size_t piece = 0;
        for (int j = 0; j <= intervals; ++j) {
            const double s = total * static_cast<double>(j) / intervals;
            while (piece + 2 < s_knots.size() && s > s_knots[piece + 1]) ++piece;
            const double tau = std::min(length, cuts[piece] + (s - s_knots[piece]) * slopes[piece]);
            const CVec jitter_dir = random_unit(rng, m);
            const double jitter = 0.5 * beta * unif(rng);
            params.push_back(s);
            pts.push_back(displace(gamma(tau), jitter_dir, jitter));
        }
        SampledCurve sigma(std::move(params), std::move(pts));
        if (certify_quasi_geodesic(sigma, alpha, beta).max_violation > 1e-12) {
            ++out.rejected;
            continue;
        }

        const auto& sp = sigma.ball_points();
        const CVec dir_start = random_unit(rng, m);
        const CVec dir_end = random_unit(rng, m);
        const BallPoint start = displace(sp.front(), dir_start, R * unif(rng));
        const BallPoint end = displace(sp.back(), dir_end, R * unif(rng));
        const double span = dist_ball(start, end);
        const int geo_intervals = std::max(1, static_cast<int>(std::ceil(span / opt.step)));
        std::vector<double> times;
        times.reserve(geo_intervals + 1);
        for (int j = 0; j <= geo_intervals; ++j) times.push_back(span * static_cast<double>(j) / geo_intervals);
        if (span == 0.0) times = {0.0};
        const SampledCurve reference = geodesic_between(start, end, times);

        const HausdorffEstimate h = hausdorff_pseudo_distance(sigma, reference);
        out.value = h.value;
        out.slack = h.slack;
        return out;
    }
    throw NumericError("estimate_morse_constant: could not certify a random quasi-geodesic");
}

}  // namespace

MorseEstimate estimate_morse_constant(int m, double alpha, double beta, double R, int trials, std::uint64_t seed,
                                      const MorseOptions& options) {
    if (m < 1) throw InputError("estimate_morse_constant: dimension must be positive");
    if (alpha < 1.0 || beta < 0.0 || R < 0.0)
        throw InputError("estimate_morse_constant: need alpha >= 1, beta >= 0, R >= 0");
    if (trials < 1) throw InputError("estimate_morse_constant: need at least one trial");
    std::vector<MorseTrial> results(static_cast<std::size_t>(trials));
    parallel_for(results.size(), [&](std::size_t i) {
        results[i] = run_morse_trial(m, alpha, beta, R, mix_seed(seed, i), options);
    });
    MorseEstimate est;
    est.trials = trials;
    for (const auto& r : results) {
        est.D = std::max(est.D, r.value);
        est.slack = std::max(est.slack, r.slack);
        est.rejected += r.rejected;
    }
    return est;
}

double RadialBoundConstants::beta() const { return 0.5 * std::log(2.0 * C) + base_offset; }

}  // namespace chyp
