#include "chyp/io.hpp"

#include <algorithm>
#include <array>
#include <fstream>

namespace chyp::io {

namespace {

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
    return j.at(key);
}

template <class Fn>
auto guarded(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw InputError(std::string(what) + ": " + e.what());
    }
}

json optional_number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json to_json(const CVec& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(to_json(cplx(v(k))));
    return out;
}

json to_json(const CMat& a) {
    json out = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(to_json(cplx(a(i, j))));
        out.push_back(std::move(row));
    }
    return out;
}

json to_json(const Automorphism& g) { return {{"dim", g.dim()}, {"matrix", to_json(g.matrix())}}; }

json to_json(const JetExpansion& jet) {
    json second = json::array();
    for (const auto& s : jet.second) second.push_back(to_json(s));
    return {{"base", to_json(jet.base)},
            {"value", to_json(jet.value)},
            {"first", to_json(jet.first)},
            {"second", std::move(second)},
            {"error_norm", jet.error_norm}};
}

json to_json(const ProperMapSpec& f) {
    json components = json::array();
    for (const auto& component : f.components) {
        json monos = json::array();
        for (const auto& mono : component) monos.push_back({{"exponents", mono.exponents}, {"coef", to_json(mono.coef)}});
        components.push_back(std::move(monos));
    }
    return {{"domain_dim", f.domain_dim}, {"target_dim", f.target_dim}, {"components", std::move(components)}};
}

json to_json(const SampledCurve& curve) {
    json points = json::array();
    if (curve.model() == CurveModel::ball) {
        for (const auto& p : curve.ball_points()) points.push_back(to_json(p.coords()));
    } else {
        for (const auto& p : curve.siegel_points()) points.push_back(to_json(p.coords()));
    }
    return {{"model", curve.model() == CurveModel::ball ? "ball" : "siegel"},
            {"params", curve.params()},
            {"points", std::move(points)}};
}

json to_json(const SymmetrySequence& seq) {
    json phi = json::array(), psi = json::array();
    for (const auto& g : seq.phi) phi.push_back(to_json(g.matrix()));
    for (const auto& g : seq.psi) psi.push_back(to_json(g.matrix()));
    return {{"indices", seq.indices}, {"phi", std::move(phi)}, {"psi", std::move(psi)}};
}

json to_json(const QuadraticNormalForm& nf) {
    return {{"lambda", nf.lambda},
            {"U", to_json(nf.U)},
            {"L", to_json(nf.L)},
            {"U_prime", to_json(nf.U_prime)},
            {"residuals",
             {{"vanishing_pattern", nf.residuals.vanishing_pattern},
              {"phase", optional_number(nf.residuals.phase)},
              {"unitarity", nf.residuals.unitarity},
              {"L_norm", nf.residuals.L_norm},
              {"final_flatten", nf.residuals.final_flatten}}}};
}

cplx complex_from_json(const json& j) {
    return guarded("complex number", [&] {
        if (j.is_number()) return cplx(j.get<double>(), 0.0);
        if (!j.is_array() || j.size() != 2) throw InputError("complex number must be [re, im]");
        return cplx(j.at(0).get<double>(), j.at(1).get<double>());
    });
}

CVec vector_from_json(const json& j) {
    if (!j.is_array()) throw InputError("complex vector must be an array");
    CVec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = complex_from_json(j[k]);
    return v;
}

CMat matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw InputError("complex matrix must be a non-empty array of rows");
    const std::size_t cols = j.at(0).size();
    CMat a(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw InputError("complex matrix rows differ in length");
        for (std::size_t k = 0; k < cols; ++k)
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = complex_from_json(j[i][k]);
    }
    return a;
}

Automorphism automorphism_from_json(const json& j) {
    const CMat a = matrix_from_json(j.is_object() ? field(j, "matrix") : j);
    if (j.is_object() && j.contains("dim") && j.at("dim").get<int>() + 1 != a.rows())
        throw InputError("automorphism: 'dim' does not match the matrix size");
    return Automorphism(a);
}

ProperMapSpec map_spec_from_json(const json& j) {
    return guarded("map spec", [&] {
        ProperMapSpec f;
        f.domain_dim = field(j, "domain_dim").get<int>();
        f.target_dim = field(j, "target_dim").get<int>();
        for (const auto& component : field(j, "components")) {
            if (!component.is_array()) throw InputError("map spec: each component must be a list of monomials");
            std::vector<Monomial> monos;
            for (const auto& mono : component)
                monos.push_back({field(mono, "exponents").get<std::vector<int>>(), complex_from_json(field(mono, "coef"))});
            f.components.push_back(std::move(monos));
        }
        f.validate();
        return f;
    });
}

SampledCurve curve_from_json(const json& j) {
    return guarded("curve", [&] {
        const std::string model = j.value("model", std::string("ball"));
        auto params = field(j, "params").get<std::vector<double>>();
        const json& pts = field(j, "points");
        if (model == "ball") {
            std::vector<BallPoint> points;
            for (const auto& p : pts) points.emplace_back(vector_from_json(p));
            return SampledCurve(std::move(params), std::move(points));
        }
        if (model == "siegel") {
            std::vector<SiegelPoint> points;
            for (const auto& p : pts) points.emplace_back(vector_from_json(p));
            return SampledCurve(std::move(params), std::move(points));
        }
        throw InputError("curve: model must be 'ball' or 'siegel'");
    });
}

SymmetrySequence sequence_from_json(const json& j) {
    return guarded("sequence", [&] {
        SymmetrySequence seq;
        for (const auto& g : field(j, "phi")) seq.phi.push_back(automorphism_from_json(g));
        for (const auto& g : field(j, "psi")) seq.psi.push_back(automorphism_from_json(g));
        if (j.contains("indices")) {
            seq.indices = j.at("indices").get<std::vector<int>>();
        } else {
            for (std::size_t i = 0; i < seq.phi.size(); ++i) seq.indices.push_back(static_cast<int>(i) + 1);
        }
        return seq;
    });
}

json trace_document(const PipelineResult& r) {
    static const std::array<const char*, 9> order{"escape_check",         "normalize_map",
                                                  "build_sequence",       "verify_scaling_law",
                                                  "extract_limit_jet",    "quadratic_normal_form",
                                                  "verify_boundary_identity", "final_normalization",
                                                  "done"};
    const auto reached = std::find(order.begin(), order.end(), r.stage) - order.begin();
    auto completed = [&](int stage) { return reached > stage; };

    json doc;
    doc["format"] = "chyp-rescaling-trace";
    doc["version"] = 1;
    doc["stage"] = r.stage;
    doc["completed"] = r.stage == "done";

    if (completed(0))
        doc["escape"] = {{"escaping", r.escape.escaping},
                         {"phi_gaps", r.escape.phi_gaps},
                         {"psi_gaps", r.escape.psi_gaps},
                         {"message", r.escape.message}};
    if (completed(1))
        doc["normalization"] = {{"pre", to_json(r.problem.pre)},
                                {"post", to_json(r.problem.post)},
                                {"input_residual", r.problem.input_residual},
                                {"output_residual", r.problem.output_residual},
                                {"sequence", to_json(r.problem.sequence)}};
    if (completed(2)) {
        json entries = json::array();
        for (const auto& e : r.trace.entries)
            entries.push_back({{"n", e.index},
                               {"t", e.t},
                               {"k", to_json(e.k)},
                               {"l", to_json(e.l)},
                               {"alpha", to_json(e.alpha)},
                               {"beta", to_json(e.beta)},
                               {"h_jet", to_json(e.h_jet)},
                               {"g_jet", to_json(e.g_jet)},
                               {"symmetry_residual", e.symmetry_residual},
                               {"phi_gap", e.phi_gap},
                               {"psi_gap", e.psi_gap},
                               {"g_value_norm", e.g_value_norm},
                               {"h_value_norm", e.h_value_norm},
                               {"compactness_distance", e.compactness_distance},
                               {"conjugation_residual", e.conjugation_residual}});
        doc["trace"] = {{"m", r.trace.m},
                        {"M", r.trace.M},
                        {"compactness_bound",
                         r.trace.compactness_bound ? json(*r.trace.compactness_bound) : json(nullptr)},
                        {"compactness_respected", r.trace.compactness_respected()},
                        {"entries", std::move(entries)}};
    }
    if (completed(3))
        doc["scaling"] = {{"max_relative_error", r.scaling.max_relative_error},
                          {"worst_index", r.scaling.worst_index},
                          {"worst_coefficient", r.scaling.worst_coefficient}};
    if (completed(4))
        doc["limit"] = {{"jet", to_json(r.limit.jet)},
                        {"cauchy_differences", r.limit.cauchy_differences},
                        {"cauchy", r.limit.cauchy},
                        {"wide_confidence", r.limit.wide_confidence},
                        {"suppressed", r.limit.suppressed},
                        {"decay_rate", optional_number(r.limit.decay_rate)},
                        {"decay_ok", r.limit.decay_ok}};
    if (completed(5)) doc["normal_form"] = to_json(r.normal_form);
    if (completed(6))
        doc["boundary_identity"] = {{"quadratic", r.boundary.quadratic}, {"isometry", r.boundary.isometry}};
    if (completed(7))
        doc["final"] = {{"A", to_json(r.final.A)},
                        {"U_prime", to_json(r.final.U_prime)},
                        {"flatten_residual", r.final.flatten_residual},
                        {"membership_residual", r.final.membership_residual}};
    return doc;
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

}  // namespace chyp::io
