#pragma once

// The rescaling pipeline: normalize f and a symmetry sequence, build the
// recentered sequences alpha_n, beta_n and the Siegel-coordinate jets of
// h_n = l_n^{-1} f k_n and g_n = a_{-t_n} h_n a_{t_n}, verify the scaling
// table, extract the limit jet and reduce it to the normal form (lambda, U, L).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chyp/group.hpp"
#include "chyp/kobayashi.hpp"
#include "chyp/map_chain.hpp"
#include "chyp/proper_maps.hpp"

namespace chyp {

/// A vanishing-pattern violation; coefficient_class() names the offending class.
class PatternError : public NumericError {
public:
    PatternError(std::string coefficient_class, double magnitude, const std::string& message)
        : NumericError(message), class_(std::move(coefficient_class)), magnitude_(magnitude) {}
    const std::string& coefficient_class() const { return class_; }
    double magnitude() const { return magnitude_; }

private:
    std::string class_;
    double magnitude_;
};

/// A sequence element that is not a symmetry pair of f.
class SymmetryError : public InputError {
public:
    SymmetryError(int index, double residual, const std::string& message)
        : InputError(message), index_(index), residual_(residual) {}
    int index() const { return index_; }
    double residual() const { return residual_; }

private:
    int index_;
    double residual_;
};

/// A sequence that does not escape to the boundary.
class DiagnosticError : public Error {
public:
    using Error::Error;
};

/// Pairs (phi_n, psi_n) labelled by increasing indices.
struct SymmetrySequence {
    std::vector<int> indices;
    std::vector<Automorphism> phi;
    std::vector<Automorphism> psi;

    std::size_t size() const { return indices.size(); }
    void validate(int m, int M) const;
};

/// phi_n = a_n on B^m and psi_n = block_extend(a_n, M), n = n_start..n_end.
SymmetrySequence cartan_sequence(int m, int M, int n_start, int n_end);

/// The sequence above conjugated by unitaries: phi_n = u a_n u^{-1},
/// psi_n = block_extend(phi_n, M). phi_n(0) approaches u(e1).
SymmetrySequence rotated_cartan_sequence(const CMat& u, int M, int n_start, int n_end);

inline constexpr double kMaxRadialTime = 18.0;

struct NormalizedProblem {
    /// f' = post o f o pre^{-1}, with f'(0) = 0, f'(e1) = e1'.
    MapChain map;
    Automorphism pre = Automorphism::identity(1);
    Automorphism post = Automorphism::identity(1);
    SymmetrySequence sequence;
    /// Largest symmetry residual of the input sequence.
    double input_residual = 0.0;
    /// Largest symmetry residual of the transformed sequence against f'.
    double output_residual = 0.0;
};

struct NormalizeOptions {
    double symmetry_tol = 1e-9;
    int samples = 32;
    std::uint64_t seed = 0;
};

/// Post-composes f with transport_to_origin(f(0)), then rotates so that the
/// last sequence element's direction phi_N(0)/|phi_N(0)| becomes e1 and its
/// image under f becomes e1'. Sequences are conjugated accordingly.
/// Throws SymmetryError when a pair fails ψ∘f = f∘φ by more than symmetry_tol.
NormalizedProblem normalize_map(const ProperMapSpec& f, const SymmetrySequence& seq, const NormalizeOptions& options = {});

struct EscapeReport {
    bool escaping = true;
    std::vector<double> phi_gaps;  // 1 - |phi_n(0)|
    std::vector<double> psi_gaps;  // 1 - |psi_n(0)|
    std::string message;
};

EscapeReport escape_check(const SymmetrySequence& seq);

struct TraceEntry {
    int index = 0;
    double t = 0.0;
    Automorphism k = Automorphism::identity(1);
    Automorphism l = Automorphism::identity(1);
    Automorphism alpha = Automorphism::identity(1);
    Automorphism beta = Automorphism::identity(1);
    JetExpansion h_jet;
    JetExpansion g_jet;
    double symmetry_residual = 0.0;
    double phi_gap = 0.0;
    double psi_gap = 0.0;
    /// |g_n(0)| in Siegel coordinates, i.e. how far g_n(e1) is from e1'.
    double g_value_norm = 0.0;
    double h_value_norm = 0.0;
    /// dist(a_{-t_n} l_n^{-1} psi_n(0), 0).
    double compactness_distance = 0.0;
    /// max |g_n(w) - beta_n f alpha_n^{-1}(w)| over Siegel sample points.
    double conjugation_residual = 0.0;
};

struct RescalingTrace {
    int m = 0;
    int M = 0;
    std::vector<TraceEntry> entries;
    /// 2D + beta + dist(0, f(0)) when configured.
    std::optional<double> compactness_bound;

    bool compactness_respected() const;
};

struct BuildOptions {
    double boundary_tol = 1e-9;
    int conjugation_samples = 20;
    std::uint64_t seed = 0;
    std::optional<double> compactness_bound;
    JetOptions h_jet_options{};
};

/// Requires f(0) = 0; each phi_n(0) must be nonzero with t_n <= kMaxRadialTime.
RescalingTrace build_sequence(const MapChain& f, const SymmetrySequence& seq, const BuildOptions& options = {});

/// Exponents e with sigma = exp(e s), s the Siegel flow parameter of g_n
/// (s = 2 t_n). Indices are 1-based as in the tables.
double first_order_exponent(int j, int k, int m, int M);
double second_order_exponent(int j, int k, int l, int m, int M);

struct ScalingProfile {
    Eigen::MatrixXd first;               // M x m
    std::vector<Eigen::MatrixXd> second;  // M of m x m
};
ScalingProfile scaling_profile(int m, int M);

double scaling_factor(int j, int k, double s, int m, int M);
double scaling_factor(int j, int k, int l, double s, int m, int M);

struct ScalingReport {
    double max_relative_error = 0.0;
    int worst_index = 0;
    /// (j, k, l) 1-based; l = 0 for first-order coefficients.
    std::array<int, 3> worst_coefficient{0, 0, 0};
};

/// Compares every coefficient of g_n against sigma times that of h_n, with
/// errors relative to max(1, |sigma h|).
ScalingReport verify_scaling_law(const RescalingTrace& trace);

struct LimitJetReport {
    JetExpansion jet;
    /// Coefficient differences between consecutive entries in the tail.
    std::vector<double> cauchy_differences;
    bool cauchy = true;
    /// The tail holds fewer than tail + 2 entries.
    bool wide_confidence = false;
    /// Per entry: largest |g_n coefficient| over classes with negative exponent.
    std::vector<double> suppressed;
    /// Observed decay rate of `suppressed` in units of t_n (nan if undefined).
    double decay_rate = 0.0;
    bool decay_ok = true;
};

LimitJetReport extract_limit_jet(const RescalingTrace& trace, int tail);

struct NormalFormResiduals {
    double vanishing_pattern = 0.0;
    double phase = 0.0;
    double unitarity = 0.0;
    double L_norm = 0.0;
    double final_flatten = 0.0;
};

struct QuadraticNormalForm {
    double lambda = 0.0;
    CMat U;
    CMat L;
    CMat U_prime;
    NormalFormResiduals residuals;
};

inline constexpr double kPatternTolerance = 1e-6;

/// Checks the vanishing pattern of a limit jet at 0 and extracts
/// lambda = d[g]_1/dz_1, U = (d[g]_j/dz_k)_{j,k>=2}, and the quadratic block
/// L_{kl} = ½ d^2[g]_1/dz_k dz_l (k, l >= 2), so that [g]_1 contains
/// sum L_{kl} z_k z_l.
QuadraticNormalForm quadratic_normal_form(const JetExpansion& jet, double tol_pattern = kPatternTolerance);

struct BoundaryIdentityResiduals {
    /// max |Im(e^{2i theta} w^T L w)|
    double quadratic = 0.0;
    /// max | |Uw|^2 - lambda |w|^2 |
    double isometry = 0.0;
};

/// Evaluates the boundary identity on basis vectors, their pairwise sums and
/// `samples` random unit w, over a grid of 16 phases.
BoundaryIdentityResiduals verify_boundary_identity(const QuadraticNormalForm& nf, int samples = 64,
                                                   std::uint64_t seed = 0);

struct FinalNormalization {
    Automorphism A = Automorphism::identity(1);
    CMat U_prime;
    double flatten_residual = 0.0;
    double membership_residual = 0.0;
};

/// Completes U/sqrt(lambda) to a unitary U', forms A = diag(1, U'^*) and
/// measures (A o a_{log lambda} o g)(z) - (z, 0) on `samples` Siegel points,
/// with g the quadratic model of `jet` and a_s the Siegel flow of parameter s.
/// Fills nf.U_prime and nf.residuals.final_flatten.
FinalNormalization final_normalization(QuadraticNormalForm& nf, const JetExpansion& jet, int samples = 50,
                                       std::uint64_t seed = 0);

struct PipelineOptions {
    NormalizeOptions normalize{};
    BuildOptions build{};
    int tail = 3;
    double tol_pattern = kPatternTolerance;
    int identity_samples = 64;
    int flatten_samples = 50;
    std::uint64_t seed = 0;
};

struct PipelineResult {
    /// Name of the stage currently running, or "done".
    std::string stage;
    EscapeReport escape;
    NormalizedProblem problem;
    RescalingTrace trace;
    ScalingReport scaling;
    LimitJetReport limit;
    QuadraticNormalForm normal_form;
    BoundaryIdentityResiduals boundary;
    FinalNormalization final;
};

/// escape_check, normalize_map, build_sequence, verify_scaling_law,
/// extract_limit_jet, quadratic_normal_form, verify_boundary_identity and
/// final_normalization in order. Results accumulate in `out`; on failure the
/// exception propagates and out.stage names the failing stage. A sequence
/// that does not escape raises DiagnosticError.
void run_rescaling_pipeline(const ProperMapSpec& f, const SymmetrySequence& seq, const PipelineOptions& options,
                            PipelineResult& out);

/// Random points of the Siegel domain with |w'| <= 0.5, |Re w1| <= 1 and
/// rho in (0, 1].
std::vector<CVec> siegel_samples(int m, int count, std::uint64_t seed);

}  // namespace chyp
