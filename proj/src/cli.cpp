#include "chyp/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include "chyp/group.hpp"
#include "chyp/io.hpp"
#include "chyp/kobayashi.hpp"
#include "chyp/proper_maps.hpp"
#include "chyp/rescaling.hpp"

namespace chyp::cli {

namespace {

constexpr const char* kCsvVersion = "1";

std::string fmt(double x, int digits) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}
std::string fmt17(double x) { return fmt(x, 17); }
std::string fmt6(double x) { return fmt(x, 6); }

std::string fmt6(cplx z) {
    if (z.imag() == 0.0) return fmt6(z.real());
    return fmt6(z.real()) + (z.imag() < 0 ? "-" : "+") + fmt6(std::abs(z.imag())) + "i";
}

std::string fmt6(const CMat& a) {
    if (a.size() == 0) return "[] (" + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ")";
    std::ostringstream os;
    os << "[";
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        os << (i ? "; " : "");
        for (Eigen::Index j = 0; j < a.cols(); ++j) os << (j ? ", " : "") << fmt6(cplx(a(i, j)));
    }
    os << "]";
    return os.str();
}

double parse_real(const std::string& s) {
    if (s.empty()) throw InputError("empty number");
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw InputError("cannot parse number '" + s + "'");
    }
    if (used != s.size()) throw InputError("cannot parse number '" + s + "'");
    return v;
}

cplx parse_complex(std::string s) {
    std::erase_if(s, [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (s.empty()) throw InputError("empty complex literal");
    if (s.back() != 'i' && s.back() != 'j') return {parse_real(s), 0.0};
    s.pop_back();
    // Split at the last sign that is not a leading sign or an exponent sign.
    std::size_t split = std::string::npos;
    for (std::size_t p = s.size(); p-- > 1;) {
        if ((s[p] == '+' || s[p] == '-') && s[p - 1] != 'e' && s[p - 1] != 'E') {
            split = p;
            break;
        }
    }
    const std::string re = split == std::string::npos ? "" : s.substr(0, split);
    std::string im = split == std::string::npos ? s : s.substr(split);
    if (im.empty() || im == "+") im = "1";
    if (im == "-") im = "-1";
    return {re.empty() ? 0.0 : parse_real(re), parse_real(im)};
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        const double v = parse_real(item);
        if (v != std::floor(v)) throw InputError("expected an integer list, got '" + text + "'");
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) throw InputError("empty integer list");
    return out;
}

// Writes to --out when given, otherwise to the command's stdout.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw InputError("cannot write '" + path + "'");
        }
        stream_ = file_ ? file_.get() : &fallback;
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

struct MapSource {
    std::string name;
    std::string spec_file;
    int m = 0;
    int M = 0;

    ProperMapSpec load() const {
        if (!name.empty() && !spec_file.empty()) throw InputError("give either --map or --spec-file, not both");
        ProperMapSpec f;
        if (!spec_file.empty()) {
            f = io::map_spec_from_json(io::read_json(spec_file));
        } else if (!name.empty()) {
            f = catalog_map(name);
        } else {
            throw InputError("a map is required (--map or --spec-file)");
        }
        if (m && f.domain_dim != m) throw InputError("--m does not match the map's domain dimension");
        if (M && f.target_dim != M) throw InputError("--M does not match the map's target dimension");
        certify_proper(f);
        return f;
    }
};

void add_map_options(CLI::App* app, MapSource& src) {
    app->add_option("--map", src.name, "catalog map, e.g. linear(2,4), whitney, power(2,2)");
    app->add_option("--spec-file", src.spec_file, "map spec JSON file");
    app->add_option("--m", src.m, "expected domain dimension");
    app->add_option("--M", src.M, "expected target dimension");
}

void check_format(const std::string& format) {
    if (format != "csv" && format != "json" && format != "text")
        throw InputError("--format must be csv, json or text");
}

// ---------------------------------------------------------------------------

struct DistArgs {
    std::string z, w;
    int m = 0;
};

int cmd_dist(const DistArgs& a, std::ostream& out, std::ostream& err) {
    const CVec z = parse_complex_list(a.z);
    const CVec w = parse_complex_list(a.w);
    if (z.size() != w.size()) throw InputError("--z and --w differ in dimension");
    if (a.m && z.size() != a.m) throw InputError("--m does not match the point dimension");
    const double d = dist_ball(BallPoint(z), BallPoint(w));
    out << fmt(d, 15) << '\n';
    if (std::isinf(d)) {
        err << "distance is infinite: a point lies on the unit sphere\n";
        return kDiagnostic;
    }
    return kSuccess;
}

struct SweepArgs {
    MapSource map;
    int directions = 16;
    std::string t_grid = "1,2,3,4,5,6";
    std::optional<double> D;
    int trials = 100;
    int density = 1;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
};

int cmd_radial_sweep(const SweepArgs& a, std::ostream& stdout_) {
    check_format(a.format);
    const ProperMapSpec f = a.map.load();
    const auto ks = parse_int_list(a.t_grid);
    RadialBoundConstants constants;
    constants.C = lipschitz_boundary_constant(f, a.density).C;
    const double base = dist_ball(BallPoint::origin(f.target_dim), evaluate(f, BallPoint::origin(f.domain_dim)));
    constants.base_offset = base;
    bool empirical = false;
    if (a.D) {
        constants.D = *a.D;
    } else {
        constants.D = estimate_morse_constant(f.target_dim, 1.0, constants.beta(), base, a.trials, a.seed).D;
        empirical = true;
    }
    const RadialSweep sweep = radial_sweep(f, deterministic_directions(f.domain_dim, a.directions), ks, constants);

    Sink sink(a.out, stdout_);
    std::ostream& os = *sink;
    if (a.format == "json") {
        io::json rows = io::json::array();
        for (const auto& r : sweep.rows)
            rows.push_back({{"direction", r.direction}, {"k", r.k}, {"t", r.t}, {"deviation", r.deviation}});
        io::json doc = {{"format", "chyp-radial-sweep"},
                        {"version", 1},
                        {"rows", rows},
                        {"summary",
                         {{"sup", sweep.sup},
                          {"C", constants.C},
                          {"beta", constants.beta()},
                          {"D", constants.D},
                          {"D_empirical", empirical},
                          {"base_offset", base},
                          {"bound", constants.bound()},
                          {"stabilization", sweep.stabilization},
                          {"bound_respected", sweep.bound_respected()}}}};
        os << doc.dump(2) << '\n';
    } else if (a.format == "csv") {
        os << "# chyp radial-sweep v" << kCsvVersion << '\n';
        os << "direction,k,t,deviation\n";
        for (const auto& r : sweep.rows)
            os << r.direction << ',' << r.k << ',' << fmt17(r.t) << ',' << fmt17(r.deviation) << '\n';
        os << "# summary\n";
        os << "sup,C,beta,D,D_empirical,base_offset,bound,stabilization,bound_respected\n";
        os << fmt17(sweep.sup) << ',' << fmt17(constants.C) << ',' << fmt17(constants.beta()) << ','
           << fmt17(constants.D) << ',' << (empirical ? 1 : 0) << ',' << fmt17(base) << ','
           << fmt17(constants.bound()) << ',' << fmt17(sweep.stabilization) << ','
           << (sweep.bound_respected() ? 1 : 0) << '\n';
    } else {
        os << "sup deviation " << fmt6(sweep.sup) << ", C " << fmt6(constants.C) << ", beta " << fmt6(constants.beta())
           << ", D " << fmt6(constants.D) << (empirical ? " (empirical)" : "") << ", bound " << fmt6(constants.bound())
           << ", stabilization " << fmt6(sweep.stabilization) << '\n';
        if (!sweep.bound_respected()) os << "flag: the sweep exceeds 2D + beta + dist(0, f(0))\n";
    }
    return kSuccess;
}

struct RescaleArgs {
    MapSource map;
    std::string seq = "cartan";
    int n_start = 1;
    int n_end = 12;
    int tail = 3;
    double tol = kPatternTolerance;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "text";
};

int cmd_rescale(const RescaleArgs& a, std::ostream& out, std::ostream& err) {
    check_format(a.format);
    PipelineResult result;
    result.stage = "load";
    const ProperMapSpec f = a.map.load();
    SymmetrySequence seq;
    if (a.seq == "cartan") {
        seq = cartan_sequence(f.domain_dim, f.target_dim, a.n_start, a.n_end);
    } else {
        seq = io::sequence_from_json(io::read_json(a.seq));
    }
    PipelineOptions options;
    options.tail = a.tail;
    options.tol_pattern = a.tol;
    options.seed = a.seed;
    options.normalize.seed = a.seed;
    options.build.seed = a.seed;

    auto write_trace = [&] {
        if (!a.out.empty()) io::write_json(a.out, io::trace_document(result));
    };
    try {
        run_rescaling_pipeline(f, seq, options, result);
    } catch (const Error&) {
        err << "stage " << result.stage << " failed\n";
        write_trace();
        throw;
    }
    write_trace();

    if (a.format == "json") {
        out << io::trace_document(result).dump(2) << '\n';
    } else {
        const auto& nf = result.normal_form;
        const auto& last = result.trace.entries.back();
        std::ostream& os = out;
        os << "indices " << seq.indices.front() << ".." << seq.indices.back() << ", t_N " << fmt6(last.t) << '\n';
        os << "symmetry residual " << fmt6(result.problem.input_residual) << '\n';
        os << "scaling law max relative error " << fmt6(result.scaling.max_relative_error) << '\n';
        os << "cauchy tail";
        for (double d : result.limit.cauchy_differences) os << ' ' << fmt6(d);
        os << (result.limit.wide_confidence ? " (wide confidence)" : "") << '\n';
        os << "lambda " << fmt6(nf.lambda) << " (phase " << fmt6(nf.residuals.phase) << ")\n";
        os << "U " << fmt6(nf.U) << '\n';
        os << "L norm " << fmt6(nf.residuals.L_norm) << ", U*U - lambda I " << fmt6(nf.residuals.unitarity) << '\n';
        os << "boundary identity " << fmt6(result.boundary.quadratic) << ", " << fmt6(result.boundary.isometry) << '\n';
        os << "flatten residual " << fmt6(result.final.flatten_residual) << '\n';
        if (result.trace.compactness_bound && !result.trace.compactness_respected())
            os << "flag: compactness bound exceeded\n";
    }
    if (!result.limit.cauchy) {
        err << "diagnostic: the jet tail is not Cauchy\n";
        return kDiagnostic;
    }
    return kSuccess;
}

struct ReportArgs {
    std::string trace;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
    const io::json doc = io::read_json(a.trace);
    if (doc.value("format", std::string()) != "chyp-rescaling-trace")
        throw InputError("'" + a.trace + "' is not a rescaling trace document");
    auto number = [](const io::json& j) { return j.is_number() ? j.get<double>() : std::nan(""); };
    out << "stage " << doc.value("stage", std::string("?")) << (doc.value("completed", false) ? " (completed)" : "")
        << '\n';
    if (doc.contains("normalization"))
        out << "symmetry residual " << fmt6(number(doc["normalization"]["input_residual"])) << '\n';
    if (doc.contains("trace")) {
        const auto& entries = doc["trace"]["entries"];
        out << "indices " << entries.size();
        if (!entries.empty()) out << ", t_N " << fmt6(number(entries.back()["t"]));
        out << '\n';
    }
    if (doc.contains("scaling"))
        out << "scaling law max relative error " << fmt6(number(doc["scaling"]["max_relative_error"])) << '\n';
    if (doc.contains("limit")) {
        out << "cauchy tail";
        for (const auto& d : doc["limit"]["cauchy_differences"]) out << ' ' << fmt6(number(d));
        out << '\n';
    }
    if (doc.contains("normal_form")) {
        const auto& nf = doc["normal_form"];
        out << "lambda " << fmt6(number(nf["lambda"])) << '\n';
        out << "L norm " << fmt6(number(nf["residuals"]["L_norm"])) << ", U*U - lambda I "
            << fmt6(number(nf["residuals"]["unitarity"])) << '\n';
    }
    if (doc.contains("boundary_identity"))
        out << "boundary identity " << fmt6(number(doc["boundary_identity"]["quadratic"])) << ", "
            << fmt6(number(doc["boundary_identity"]["isometry"])) << '\n';
    if (doc.contains("final")) out << "flatten residual " << fmt6(number(doc["final"]["flatten_residual"])) << '\n';
    return kSuccess;
}

struct HausdorffArgs {
    std::string a, b;
    std::string out;
    std::string format = "text";
};

int cmd_hausdorff(const HausdorffArgs& a, std::ostream& stdout_) {
    check_format(a.format);
    const SampledCurve c1 = io::curve_from_json(io::read_json(a.a));
    const SampledCurve c2 = io::curve_from_json(io::read_json(a.b));
    const HausdorffEstimate h = hausdorff_pseudo_distance(c1, c2);
    Sink sink(a.out, stdout_);
    if (a.format == "csv") {
        *sink << "# chyp hausdorff v" << kCsvVersion << "\nvalue,slack\n" << fmt17(h.value) << ',' << fmt17(h.slack) << '\n';
    } else if (a.format == "json") {
        *sink << io::json{{"value", h.value}, {"slack", h.slack}}.dump(2) << '\n';
    } else {
        *sink << fmt17(h.value) << " (slack " << fmt6(h.slack) << ")\n";
    }
    return kSuccess;
}

struct MorseArgs {
    int m = 1;
    double alpha = 1.0, beta = 1.0, R = 0.0;
    int trials = 100;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "text";
};

int cmd_morse(const MorseArgs& a, std::ostream& stdout_) {
    check_format(a.format);
    const MorseEstimate est = estimate_morse_constant(a.m, a.alpha, a.beta, a.R, a.trials, a.seed);
    Sink sink(a.out, stdout_);
    if (a.format == "csv") {
        *sink << "# chyp morse v" << kCsvVersion << "\nm,alpha,beta,R,trials,seed,D,slack,rejected\n"
              << a.m << ',' << fmt17(a.alpha) << ',' << fmt17(a.beta) << ',' << fmt17(a.R) << ',' << a.trials << ','
              << a.seed << ',' << fmt17(est.D) << ',' << fmt17(est.slack) << ',' << est.rejected << '\n';
    } else if (a.format == "json") {
        *sink << io::json{{"D", est.D}, {"slack", est.slack}, {"trials", est.trials}, {"rejected", est.rejected}}.dump(2)
              << '\n';
    } else {
        *sink << fmt17(est.D) << '\n';
    }
    return kSuccess;
}

struct GroupArgs {
    std::string matrix;
    double tol = default_tolerances().group;
};

int cmd_verify_group(const GroupArgs& a, std::ostream& out, std::ostream& err) {
    const Automorphism g = io::automorphism_from_json(io::read_json(a.matrix));
    const double residual = verify_membership(g);
    const double tol = membership_tolerance(g, a.tol);
    out << "residual " << fmt17(residual) << '\n' << "tolerance " << fmt17(tol) << '\n';
    if (residual > tol) {
        err << "not an element of U(m,1)\n";
        return kValidation;
    }
    return kSuccess;
}

struct CatalogArgs {
    std::string map;
    std::string out;
};

int cmd_catalog(const CatalogArgs& a, std::ostream& stdout_) {
    Sink sink(a.out, stdout_);
    if (a.map.empty()) {
        for (const auto& name : catalog_names()) {
            const ProperMapSpec f = catalog_map(name);
            *sink << name << "  m=" << f.domain_dim << " M=" << f.target_dim << " degree=" << f.degree()
                  << " properness residual " << fmt6(properness_residual(f, 1000)) << '\n';
        }
        return kSuccess;
    }
    const ProperMapSpec f = catalog_map(a.map);
    certify_proper(f);
    *sink << io::to_json(f).dump(2) << '\n';
    return kSuccess;
}

}  // namespace

CVec parse_complex_list(const std::string& text) {
    std::vector<cplx> values;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) values.push_back(parse_complex(item));
    if (values.empty()) throw InputError("empty point");
    return Eigen::Map<const CVec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Complex hyperbolic geometry of proper ball maps"};
    app.require_subcommand(1);

    DistArgs dist;
    auto* c_dist = app.add_subcommand("dist", "Kobayashi distance between two points of the ball");
    c_dist->add_option("--z", dist.z, "first point, e.g. 0.5+0.1i,0")->required();
    c_dist->add_option("--w", dist.w, "second point")->required();
    c_dist->add_option("--m", dist.m, "expected dimension");

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("radial-sweep", "dist(f(tv), t f(v)) over directions and t = 1 - 10^-k");
    add_map_options(c_sweep, sweep.map);
    c_sweep->add_option("--directions", sweep.directions, "number of deterministic directions");
    c_sweep->add_option("--t-grid", sweep.t_grid, "comma-separated exponents k");
    c_sweep->add_option("--D", sweep.D, "Morse constant (estimated when omitted)");
    c_sweep->add_option("--trials", sweep.trials, "Morse estimation trials");
    c_sweep->add_option("--density", sweep.density, "Lipschitz grid density");
    c_sweep->add_option("--seed", sweep.seed);
    c_sweep->add_option("--out", sweep.out);
    c_sweep->add_option("--format", sweep.format, "csv | json | text");

    RescaleArgs rescale;
    auto* c_rescale = app.add_subcommand("rescale", "run the rescaling pipeline and report the normal form");
    add_map_options(c_rescale, rescale.map);
    c_rescale->add_option("--seq", rescale.seq, "'cartan' or a sequence JSON file");
    c_rescale->add_option("--n-start", rescale.n_start);
    c_rescale->add_option("--n-end", rescale.n_end);
    c_rescale->add_option("--tail", rescale.tail, "Cauchy tail length");
    c_rescale->add_option("--tol", rescale.tol, "vanishing-pattern tolerance");
    c_rescale->add_option("--seed", rescale.seed);
    c_rescale->add_option("--out", rescale.out, "trace document path");
    c_rescale->add_option("--format", rescale.format, "text | json");

    ReportArgs report;
    auto* c_report = app.add_subcommand("report", "summarize a saved rescaling trace document");
    c_report->add_option("--trace", report.trace, "trace JSON written by rescale --out")->required();

    HausdorffArgs haus;
    auto* c_haus = app.add_subcommand("hausdorff", "Hausdorff pseudo-distance between two curve files");
    c_haus->add_option("--a", haus.a)->required();
    c_haus->add_option("--b", haus.b)->required();
    c_haus->add_option("--out", haus.out);
    c_haus->add_option("--format", haus.format, "text | csv | json");

    MorseArgs morse;
    auto* c_morse = app.add_subcommand("morse", "empirical Morse constant estimate");
    c_morse->add_option("--m", morse.m);
    c_morse->add_option("--alpha", morse.alpha);
    c_morse->add_option("--beta", morse.beta);
    c_morse->add_option("--R", morse.R);
    c_morse->add_option("--trials", morse.trials);
    c_morse->add_option("--seed", morse.seed);
    c_morse->add_option("--out", morse.out);
    c_morse->add_option("--format", morse.format, "text | csv | json");

    GroupArgs group;
    auto* c_group = app.add_subcommand("verify-group", "membership residual of a matrix file");
    c_group->add_option("--matrix", group.matrix, "automorphism JSON file")->required();
    c_group->add_option("--tol", group.tol);

    CatalogArgs cat;
    auto* c_cat = app.add_subcommand("catalog", "list catalog maps or print one as a spec file");
    c_cat->add_option("--map", cat.map);
    c_cat->add_option("--out", cat.out);

    std::vector<const char*> argv{"chyp"};
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kValidation;
    }

    try {
        if (c_dist->parsed()) return cmd_dist(dist, out, err);
        if (c_sweep->parsed()) return cmd_radial_sweep(sweep, out);
        if (c_rescale->parsed()) return cmd_rescale(rescale, out, err);
        if (c_report->parsed()) return cmd_report(report, out);
        if (c_haus->parsed()) return cmd_hausdorff(haus, out);
        if (c_morse->parsed()) return cmd_morse(morse, out);
        if (c_group->parsed()) return cmd_verify_group(group, out, err);
        if (c_cat->parsed()) return cmd_catalog(cat, out);
    } catch (const SymmetryError& e) {
        err << "error: " << e.what() << "\nresidual " << fmt17(e.residual()) << '\n';
        return kValidation;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const DiagnosticError& e) {
        err << "diagnostic: " << e.what() << '\n';
        return kDiagnostic;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kNumeric;
    }
    return kValidation;
}

}  // namespace chyp::cli
