#include "chyp/rescaling.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>

#include "chyp/parallel.hpp"

namespace chyp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_identity(const Automorphism& g) {
    const auto n = g.matrix().rows();
    return max_abs(g.matrix() - CMat::Identity(n, n)) == 0.0;
}

Automorphism conjugate(const Automorphism& by, const Automorphism& g) { return compose(compose(by, g), inverse(by)); }

// 1 - |p| from the carried gap 1 - |p|^2.
double boundary_gap(const BallPoint& p) { return p.gap() / (1.0 + p.norm()); }

double max_coefficient_difference(const JetExpansion& a, const JetExpansion& b) {
    double d = (a.value - b.value).cwiseAbs().maxCoeff();
    d = std::max(d, max_abs(a.first - b.first));
    for (std::size_t j = 0; j < a.second.size(); ++j) d = std::max(d, max_abs(a.second[j] - b.second[j]));
    return d;
}

void check_index(bool ok, const char* what) {
    if (!ok) throw InputError(std::string("scaling table: ") + what + " index out of range");
}

}  // namespace

// ---------------------------------------------------------------------------
// Sequences

void SymmetrySequence::validate(int m, int M) const {
    if (indices.empty()) throw InputError("symmetry sequence is empty");
    if (phi.size() != indices.size() || psi.size() != indices.size())
        throw InputError("symmetry sequence: phi, psi and indices differ in length");
    for (std::size_t i = 1; i < indices.size(); ++i)
        if (indices[i] <= indices[i - 1]) throw InputError("symmetry sequence: indices must be strictly increasing");
    for (std::size_t i = 0; i < indices.size(); ++i)
        if (phi[i].dim() != m || psi[i].dim() != M)
            throw InputError("symmetry sequence: automorphism dimensions do not match the map");
}

SymmetrySequence cartan_sequence(int m, int M, int n_start, int n_end) {
    if (n_end < n_start) throw InputError("cartan_sequence: empty index range");
    SymmetrySequence seq;
    for (int n = n_start; n <= n_end; ++n) {
        seq.indices.push_back(n);
        seq.phi.push_back(cartan(n, m));
        seq.psi.push_back(block_extend(seq.phi.back(), M));
    }
    return seq;
}

SymmetrySequence rotated_cartan_sequence(const CMat& u, int M, int n_start, int n_end) {
    const int m = static_cast<int>(u.rows());
    const Automorphism rot = unitary_automorphism(u);
    if (!is_member(rot)) throw InputError("rotated_cartan_sequence: rotation is not unitary");
    SymmetrySequence seq = cartan_sequence(m, M, n_start, n_end);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        seq.phi[i] = conjugate(rot, seq.phi[i]);
        seq.psi[i] = block_extend(seq.phi[i], M);
    }
    return seq;
}

// ---------------------------------------------------------------------------
// Normalization

NormalizedProblem normalize_map(const ProperMapSpec& f, const SymmetrySequence& seq, const NormalizeOptions& options) {
    const int m = f.domain_dim;
    const int M = f.target_dim;
    seq.validate(m, M);

    NormalizedProblem out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const double r = verify_symmetry_pair(f, seq.phi[i], seq.psi[i], options.samples, options.seed).residual;
        out.input_residual = std::max(out.input_residual, r);
        if (!(r <= options.symmetry_tol)) {
            std::ostringstream os;
            os << "symmetry verification failed at n = " << seq.indices[i] << ": residual max|ψ(f(z)) - f(φ(z))| = " << r
               << " exceeds " << options.symmetry_tol;
            throw SymmetryError(seq.indices[i], r, os.str());
        }
    }

    const Automorphism T = transport_to_origin(evaluate(f, BallPoint::origin(m)));
    const BallPoint last = origin_image(seq.phi.back());
    if (last.norm() == 0.0) throw DiagnosticError("normalize_map: the last sequence element fixes the origin");
    const CVec x = last.coords() / last.norm();
    const Automorphism R1 = inverse(rotation_mapping_e1(x));
    const CVec y = apply_ball(T, evaluate(f, BallPoint::with_gap(x, 0.0))).coords();
    if (std::abs(y.norm() - 1.0) > default_tolerances().closure)
        throw InputError("normalize_map: f does not send the limit direction to the sphere");
    const Automorphism R2 = inverse(rotation_mapping_e1(y / y.norm()));

    out.pre = R1;
    out.post = compose(R2, T);
    MapChain chain;
    if (!is_identity(R1)) chain = chain.then(stage::Mobius{inverse(R1)});
    chain = chain.then(stage::Polynomial{f});
    if (!is_identity(out.post)) chain = chain.then(stage::Mobius{out.post});
    out.map = chain;

    out.sequence.indices = seq.indices;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        out.sequence.phi.push_back(is_identity(R1) ? seq.phi[i] : conjugate(R1, seq.phi[i]));
        out.sequence.psi.push_back(is_identity(out.post) ? seq.psi[i] : conjugate(out.post, seq.psi[i]));
        const double r = verify_symmetry_pair(out.map, out.sequence.phi[i], out.sequence.psi[i], options.samples,
                                              options.seed)
                             .residual;
        out.output_residual = std::max(out.output_residual, r);
    }
    return out;
}

EscapeReport escape_check(const SymmetrySequence& seq) {
    EscapeReport report;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        report.phi_gaps.push_back(boundary_gap(origin_image(seq.phi[i])));
        report.psi_gaps.push_back(boundary_gap(origin_image(seq.psi[i])));
    }
    auto check = [&](const std::vector<double>& gaps, const char* name) {
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            std::ostringstream os;
            if (!(gaps[i] < 1.0)) {
                os << name << "_n(0) = 0 at n = " << seq.indices[i];
            } else if (i > 0 && !(gaps[i] < gaps[i - 1])) {
                os << "|" << name << "_n(0)| does not increase between n = " << seq.indices[i - 1]
                   << " and n = " << seq.indices[i] << " (gaps " << gaps[i - 1] << ", " << gaps[i] << ")";
            } else {
                continue;
            }
            report.escaping = false;
            report.message = "sequence does not escape to the boundary: " + os.str();
            return false;
        }
        return true;
    };
    if (check(report.phi_gaps, "phi")) check(report.psi_gaps, "psi");
    return report;
}

// ---------------------------------------------------------------------------
// Trace

bool RescalingTrace::compactness_respected() const {
    if (!compactness_bound) return true;
    return std::all_of(entries.begin(), entries.end(),
                       [&](const TraceEntry& e) { return e.compactness_distance <= *compactness_bound; });
}

std::vector<CVec> siegel_samples(int m, int count, std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 0));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<CVec> out;
    out.reserve(count);
    for (int s = 0; s < count; ++s) {
        CVec w = CVec::Zero(m);
        double tail = 0.0;
        if (m > 1) {
            for (int k = 1; k < m; ++k) w(k) = cplx(normal(rng), normal(rng));
            w.tail(m - 1) *= 0.5 * std::pow(unif(rng), 1.0 / (2.0 * (m - 1))) / w.tail(m - 1).norm();
            tail = w.tail(m - 1).squaredNorm();
        }
        const double x = 2.0 * unif(rng) - 1.0;
        const double y = 1.0 - unif(rng);
        w(0) = cplx(x, tail + y);
        out.push_back(std::move(w));
    }
    return out;
}

RescalingTrace build_sequence(const MapChain& f, const SymmetrySequence& seq, const BuildOptions& options) {
    const int m = f.in_dim();
    const int M = f.out_dim();
    seq.validate(m, M);
    if (f(CVec::Zero(m)).norm() > 1e-12) throw InputError("build_sequence: the map must fix the origin");

    RescalingTrace trace;
    trace.m = m;
    trace.M = M;
    trace.compactness_bound = options.compactness_bound;
    trace.entries.resize(seq.size());

    parallel_for(seq.size(), [&](std::size_t i) {
        TraceEntry& e = trace.entries[i];
        e.index = seq.indices[i];
        const BallPoint o = origin_image(seq.phi[i]);
        if (o.norm() == 0.0) {
            std::ostringstream os;
            os << "build_sequence: phi_n(0) = 0 at n = " << e.index << "; the sequence does not escape";
            throw DiagnosticError(os.str());
        }
        e.t = o.radial_time();
        if (e.t > kMaxRadialTime) {
            std::ostringstream os;
            os << "build_sequence: t_n = " << e.t << " at n = " << e.index << " exceeds the cap " << kMaxRadialTime;
            throw InputError(os.str());
        }
        const CVec v = o.coords() / o.norm();
        e.k = rotation_mapping_e1(v);
        const CVec fv = f(v);
        if (std::abs(fv.norm() - 1.0) > options.boundary_tol) {
            std::ostringstream os;
            os << "build_sequence: |f(v_n)| = " << fv.norm() << " at n = " << e.index << " is not on the sphere";
            throw InputError(os.str());
        }
        const CVec w = fv / fv.norm();
        e.l = rotation_mapping_e1(w);
        e.alpha = compose(cartan(-e.t, m), compose(inverse(e.k), seq.phi[i]));
        e.beta = compose(cartan(-e.t, M), compose(inverse(e.l), seq.psi[i]));

        const MapChain h = MapChain(stage::CayleyToBall{m})
                               .then(stage::Mobius{e.k})
                               .then(f)
                               .then(stage::Mobius{inverse(e.l)})
                               .then(stage::CayleyToSiegel{M});
        // g_n in conjugated form. Its jets are exact rescalings of those of h_n,
        // whereas beta_n f alpha_n^{-1} loses about e^{2 t_n} ulps.
        const MapChain g = MapChain(stage::SiegelFlow{2.0 * e.t, m}).then(h).then(stage::SiegelFlow{-2.0 * e.t, M});
        e.h_jet = jet_at_zero(h, options.h_jet_options);
        JetOptions no_check;
        no_check.finite_difference_check = false;
        e.g_jet = jet_at_zero(g, no_check);
        e.g_value_norm = e.g_jet.value.norm();
        e.h_value_norm = e.h_jet.value.norm();

        const MapChain g_direct = MapChain(stage::CayleyToBall{m})
                                      .then(stage::Mobius{inverse(e.alpha)})
                                      .then(f)
                                      .then(stage::Mobius{e.beta})
                                      .then(stage::CayleyToSiegel{M});
        for (const CVec& p : siegel_samples(m, options.conjugation_samples, mix_seed(options.seed, e.index)))
            e.conjugation_residual = std::max(e.conjugation_residual, (g(p) - g_direct(p)).norm());

        e.symmetry_residual = verify_symmetry_pair(f, seq.phi[i], seq.psi[i], 32, options.seed).residual;
        e.phi_gap = boundary_gap(o);
        const BallPoint psi0 = origin_image(seq.psi[i]);
        e.psi_gap = boundary_gap(psi0);
        const double c = std::cosh(e.t);
        e.compactness_distance = dist_ball(psi0, BallPoint::with_gap(std::tanh(e.t) * w, 1.0 / (c * c)));
    });
    return trace;
}

// ---------------------------------------------------------------------------
// Scaling table

double first_order_exponent(int j, int k, int m, int M) {
    check_index(j >= 1 && j <= M, "output");
    check_index(k >= 1 && k <= m, "input");
    if (j == 1 && k == 1) return 0.0;
    if (j == 1) return 0.5;
    if (k == 1) return -0.5;
    return 0.0;
}

double second_order_exponent(int j, int k, int l, int m, int M) {
    check_index(j >= 1 && j <= M, "output");
    check_index(k >= 1 && k <= m && l >= 1 && l <= m, "input");
    const int ones = (k == 1) + (l == 1);
    if (j == 1) return ones == 2 ? -1.0 : (ones == 1 ? -0.5 : 0.0);
    return ones == 2 ? -1.5 : (ones == 1 ? -1.0 : -0.5);
}

ScalingProfile scaling_profile(int m, int M) {
    ScalingProfile p;
    p.first.resize(M, m);
    p.second.assign(M, Eigen::MatrixXd(m, m));
    for (int j = 1; j <= M; ++j)
        for (int k = 1; k <= m; ++k) {
            p.first(j - 1, k - 1) = first_order_exponent(j, k, m, M);
            for (int l = 1; l <= m; ++l) p.second[j - 1](k - 1, l - 1) = second_order_exponent(j, k, l, m, M);
        }
    return p;
}

double scaling_factor(int j, int k, double s, int m, int M) { return std::exp(first_order_exponent(j, k, m, M) * s); }

double scaling_factor(int j, int k, int l, double s, int m, int M) {
    return std::exp(second_order_exponent(j, k, l, m, M) * s);
}

ScalingReport verify_scaling_law(const RescalingTrace& trace) {
    ScalingReport report;
    const ScalingProfile profile = scaling_profile(trace.m, trace.M);
    auto consider = [&](cplx g, cplx h, double sigma, int index, std::array<int, 3> coef) {
        const cplx predicted = sigma * h;
        const double err = std::abs(g - predicted) / std::max(1.0, std::abs(predicted));
        if (err > report.max_relative_error) {
            report.max_relative_error = err;
            report.worst_index = index;
            report.worst_coefficient = coef;
        }
    };
    for (const auto& e : trace.entries) {
        const double s = 2.0 * e.t;
        for (int j = 0; j < trace.M; ++j)
            for (int k = 0; k < trace.m; ++k) {
                consider(e.g_jet.first(j, k), e.h_jet.first(j, k), std::exp(profile.first(j, k) * s), e.index,
                         {j + 1, k + 1, 0});
                for (int l = 0; l < trace.m; ++l)
                    consider(e.g_jet.second[j](k, l), e.h_jet.second[j](k, l), std::exp(profile.second[j](k, l) * s),
                             e.index, {j + 1, k + 1, l + 1});
            }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Limit jet

LimitJetReport extract_limit_jet(const RescalingTrace& trace, int tail) {
    if (tail < 1) throw InputError("extract_limit_jet: tail must be at least 1");
    const int n = static_cast<int>(trace.entries.size());
    if (n < tail + 1) {
        std::ostringstream os;
        os << "extract_limit_jet: a tail of " << tail << " needs at least " << tail + 1 << " trace entries, got " << n;
        throw InputError(os.str());
    }
    LimitJetReport report;
    report.jet = trace.entries.back().g_jet;
    report.wide_confidence = n < tail + 2;
    for (int i = n - tail; i < n; ++i)
        report.cauchy_differences.push_back(
            max_coefficient_difference(trace.entries[i].g_jet, trace.entries[i - 1].g_jet));
    for (std::size_t i = 1; i < report.cauchy_differences.size(); ++i)
        if (report.cauchy_differences[i] > report.cauchy_differences[i - 1] * (1.0 + 1e-9) + 1e-14)
            report.cauchy = false;

    const ScalingProfile profile = scaling_profile(trace.m, trace.M);
    for (const auto& e : trace.entries) {
        double worst = 0.0;
        for (int j = 0; j < trace.M; ++j)
            for (int k = 0; k < trace.m; ++k) {
                if (profile.first(j, k) < 0.0) worst = std::max(worst, std::abs(e.g_jet.first(j, k)));
                for (int l = 0; l < trace.m; ++l)
                    if (profile.second[j](k, l) < 0.0) worst = std::max(worst, std::abs(e.g_jet.second[j](k, l)));
            }
        report.suppressed.push_back(worst);
    }

    const auto& first = trace.entries[n - tail - 1];
    const auto& last = trace.entries.back();
    const double s0 = report.suppressed[n - tail - 1];
    const double s1 = report.suppressed.back();
    constexpr double kNegligible = 1e-12;
    if (std::max(s0, s1) <= kNegligible) {
        report.decay_rate = kNaN;
        report.decay_ok = true;
    } else if (s0 > 0.0 && s1 > 0.0 && last.t > first.t) {
        report.decay_rate = -std::log(s1 / s0) / (last.t - first.t);
        report.decay_ok = report.decay_rate >= 0.5 - 1e-3 || s1 <= kNegligible;
    } else {
        report.decay_rate = kNaN;
        report.decay_ok = s1 <= kNegligible;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Normal form

QuadraticNormalForm quadratic_normal_form(const JetExpansion& jet, double tol_pattern) {
    const int m = jet.domain_dim();
    const int M = jet.target_dim();
    if (m < 1 || M < m) throw InputError("quadratic_normal_form: jet dimensions are invalid");
    if (jet.base.norm() != 0.0) throw InputError("quadratic_normal_form: jet must be taken at the origin");

    std::vector<std::pair<std::string, double>> classes;
    classes.emplace_back("value", jet.value.norm());
    double v = 0.0;
    for (int j = 1; j < M; ++j) v = std::max(v, std::abs(jet.first(j, 0)));
    classes.emplace_back("(j≥2, k=1)", v);
    v = 0.0;
    for (int k = 1; k < m; ++k) v = std::max(v, std::abs(jet.first(0, k)));
    classes.emplace_back("(j=1, k≥2)", v);
    v = 0.0;
    for (int l = 0; l < m; ++l) v = std::max({v, std::abs(jet.second[0](0, l)), std::abs(jet.second[0](l, 0))});
    classes.emplace_back("(j=1; k=1 or ℓ=1)", v);
    v = 0.0;
    for (int j = 1; j < M; ++j) v = std::max(v, max_abs(jet.second[j]));
    classes.emplace_back("(j≥2; all k,ℓ)", v);

    QuadraticNormalForm nf;
    for (const auto& [name, magnitude] : classes) {
        nf.residuals.vanishing_pattern = std::max(nf.residuals.vanishing_pattern, magnitude);
        if (!(magnitude <= tol_pattern)) {
            std::ostringstream os;
            os << "vanishing pattern violated in class " << name << ": magnitude " << magnitude << " exceeds "
               << tol_pattern;
            throw PatternError(name, magnitude, os.str());
        }
    }

    const cplx lambda_hat = jet.first(0, 0);
    const double modulus = std::abs(lambda_hat);
    nf.residuals.phase = modulus > 0.0 ? std::abs(lambda_hat.imag()) / modulus : kNaN;
    if (!(modulus > 0.0) || !(nf.residuals.phase <= 1e-6) || !(lambda_hat.real() > 0.0)) {
        std::ostringstream os;
        os << "d[g]_1/dz_1(0) = (" << lambda_hat.real() << ", " << lambda_hat.imag() << ") is not real positive";
        throw PatternError("lambda", modulus, os.str());
    }
    nf.lambda = lambda_hat.real();
    nf.U = jet.first.block(1, 1, M - 1, m - 1);
    nf.L = 0.5 * jet.second[0].block(1, 1, m - 1, m - 1);
    nf.residuals.unitarity =
        max_abs(nf.U.adjoint() * nf.U - nf.lambda * CMat::Identity(m - 1, m - 1));
    nf.residuals.L_norm = max_abs(nf.L);
    return nf;
}

BoundaryIdentityResiduals verify_boundary_identity(const QuadraticNormalForm& nf, int samples, std::uint64_t seed) {
    const auto n = nf.U.cols();
    BoundaryIdentityResiduals res;
    if (n == 0) return res;
    if (nf.L.rows() != n || nf.L.cols() != n) throw InputError("verify_boundary_identity: U and L sizes differ");

    std::vector<CVec> ws;
    for (Eigen::Index k = 0; k < n; ++k) ws.push_back(CVec::Unit(n, k));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            CVec a = CVec::Zero(n), b = CVec::Zero(n);
            a(i) = b(i) = 1.0 / std::sqrt(2.0);
            a(j) = 1.0 / std::sqrt(2.0);
            b(j) = kI / std::sqrt(2.0);
            ws.push_back(a);
            ws.push_back(b);
        }
    std::mt19937_64 rng(mix_seed(seed, 0));
    std::normal_distribution<double> normal;
    for (int s = 0; s < samples; ++s) {
        CVec w(n);
        for (Eigen::Index k = 0; k < n; ++k) w(k) = cplx(normal(rng), normal(rng));
        ws.push_back(w / w.norm());
    }
    constexpr int kPhases = 16;
    for (const CVec& w : ws) {
        const cplx q = (w.transpose() * nf.L * w)(0);
        for (int p = 0; p < kPhases; ++p) {
            const double theta = M_PI * p / kPhases;
            res.quadratic = std::max(res.quadratic, std::abs((std::polar(1.0, 2.0 * theta) * q).imag()));
        }
        res.isometry = std::max(res.isometry, std::abs((nf.U * w).squaredNorm() - nf.lambda * w.squaredNorm()));
    }
    return res;
}

FinalNormalization final_normalization(QuadraticNormalForm& nf, const JetExpansion& jet, int samples,
                                       std::uint64_t seed) {
    const int m = jet.domain_dim();
    const int M = jet.target_dim();
    if (nf.U.rows() != M - 1 || nf.U.cols() != m - 1)
        throw InputError("final_normalization: normal form does not match the jet dimensions");
    if (!(nf.lambda > 0.0)) throw InputError("final_normalization: lambda must be positive");
    const BoundaryIdentityResiduals bi = verify_boundary_identity(nf);
    if (bi.quadratic > 1e-8 || bi.isometry > 1e-8) {
        std::ostringstream os;
        os << "final_normalization: boundary identity residuals (" << bi.quadratic << ", " << bi.isometry
           << ") exceed 1e-8";
        throw NumericError(os.str());
    }

    FinalNormalization out;
    out.U_prime = unitary_completion(nf.U / std::sqrt(nf.lambda), M - 1);
    CMat block = CMat::Identity(M, M);
    block.bottomRightCorner(M - 1, M - 1) = out.U_prime.adjoint();
    out.A = unitary_automorphism(block);
    out.membership_residual = verify_membership(out.A);

    const double s = std::log(nf.lambda);
    const CMat a_lin = out.A.linear_block();
    for (const CVec& z : siegel_samples(m, samples, seed)) {
        CVec q = evaluate_quadratic_model(jet, z);
        q(0) *= std::exp(-s);
        q.tail(M - 1) *= std::exp(-0.5 * s);
        CVec target = CVec::Zero(M);
        target.head(m) = z;
        out.flatten_residual = std::max(out.flatten_residual, (a_lin * q - target).norm());
    }
    nf.U_prime = out.U_prime;
    nf.residuals.final_flatten = out.flatten_residual;
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline

void run_rescaling_pipeline(const ProperMapSpec& f, const SymmetrySequence& seq, const PipelineOptions& options,
                            PipelineResult& out) {
    out.stage = "escape_check";
    seq.validate(f.domain_dim, f.target_dim);
    out.escape = escape_check(seq);
    if (!out.escape.escaping) throw DiagnosticError(out.escape.message);

    out.stage = "normalize_map";
    out.problem = normalize_map(f, seq, options.normalize);

    out.stage = "build_sequence";
    out.trace = build_sequence(out.problem.map, out.problem.sequence, options.build);

    out.stage = "verify_scaling_law";
    out.scaling = verify_scaling_law(out.trace);

    out.stage = "extract_limit_jet";
    const int tail = std::min<int>(options.tail, static_cast<int>(out.trace.entries.size()) - 1);
    if (tail < 1) throw InputError("extract_limit_jet: at least two sequence indices are required");
    out.limit = extract_limit_jet(out.trace, tail);

    out.stage = "quadratic_normal_form";
    out.normal_form = quadratic_normal_form(out.limit.jet, options.tol_pattern);

    out.stage = "verify_boundary_identity";
    out.boundary = verify_boundary_identity(out.normal_form, options.identity_samples, options.seed);

    out.stage = "final_normalization";
    out.final = final_normalization(out.normal_form, out.limit.jet, options.flatten_samples, options.seed);
    out.stage = "done";
}

}  // namespace chyp
