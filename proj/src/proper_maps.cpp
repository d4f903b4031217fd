#include "chyp/proper_maps.hpp"

#include <algorithm>
#include <random>
#include <regex>
#include <sstream>

#include "chyp/parallel.hpp"

namespace chyp {

namespace catalog {

ProperMapSpec linear(int m, int M) {
    if (m < 1) throw InputError("linear: m must be positive");
    if (M < m) throw InputError("linear: need M >= m");
    ProperMapSpec f;
    f.domain_dim = m;
    f.target_dim = M;
    f.components.resize(M);
    for (int k = 0; k < m; ++k) {
        std::vector<int> e(m, 0);
        e[k] = 1;
        f.components[k].push_back({e, 1.0});
    }
    return f;
}

ProperMapSpec whitney(int m) {
    if (m < 2) throw InputError("whitney: m must be at least 2");
    ProperMapSpec f;
    f.domain_dim = m;
    f.target_dim = 2 * m - 1;
    for (int k = 0; k + 1 < m; ++k) {
        std::vector<int> e(m, 0);
        e[k] = 1;
        f.components.push_back({{e, 1.0}});
    }
    for (int k = 0; k < m; ++k) {
        std::vector<int> e(m, 0);
        e[k] += 1;
        e[m - 1] += 1;
        f.components.push_back({{e, 1.0}});
    }
    return f;
}

namespace {

// Exponent vectors of total degree d in m variables, descending lexicographic.
void multi_indices(int m, int d, std::vector<int>& prefix, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(prefix.size()) == m - 1) {
        prefix.push_back(d);
        out.push_back(prefix);
        prefix.pop_back();
        return;
    }
    for (int a = d; a >= 0; --a) {
        prefix.push_back(a);
        multi_indices(m, d - a, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

ProperMapSpec power(int m, int d) {
    if (m < 1) throw InputError("power: m must be positive");
    if (d < 1 || d > ProperMapSpec::kMaxDegree) throw InputError("power: degree out of range");
    std::vector<std::vector<int>> indices;
    std::vector<int> prefix;
    multi_indices(m, d, prefix, indices);
    ProperMapSpec f;
    f.domain_dim = m;
    f.target_dim = static_cast<int>(indices.size());
    for (const auto& a : indices) {
        double log_coef = std::lgamma(d + 1.0);
        for (int e : a) log_coef -= std::lgamma(e + 1.0);
        f.components.push_back({{a, std::sqrt(std::round(std::exp(log_coef)))}});
    }
    return f;
}

}  // namespace catalog

ProperMapSpec catalog_map(const std::string& name) {
    static const std::regex pattern(R"(^\s*([a-z]+)\s*(?:\(\s*([0-9\s,]*)\))?\s*$)");
    std::smatch match;
    if (!std::regex_match(name, match, pattern)) throw InputError("catalog: cannot parse map name '" + name + "'");
    std::vector<int> args;
    std::stringstream ss(match[2].str());
    for (std::string item; std::getline(ss, item, ',');) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        args.push_back(std::stoi(item));
    }
    const std::string kind = match[1].str();
    auto need = [&](std::size_t n) {
        if (args.size() != n) throw InputError("catalog: wrong number of parameters for '" + kind + "'");
    };
    if (kind == "linear") {
        need(2);
        return catalog::linear(args[0], args[1]);
    }
    if (kind == "whitney") {
        if (args.empty()) return catalog::whitney();
        need(1);
        return catalog::whitney(args[0]);
    }
    if (kind == "power") {
        need(2);
        return catalog::power(args[0], args[1]);
    }
    throw InputError("catalog: unknown map '" + kind + "'");
}

std::vector<std::string> catalog_names() { return {"linear(2,4)", "whitney", "power(2,2)"}; }

std::vector<CVec> deterministic_directions(int m, int count, std::uint64_t seed) {
    if (m < 1) throw InputError("deterministic_directions: m must be positive");
    std::vector<CVec> out;
    out.reserve(count);
    for (int k = 0; k < m && static_cast<int>(out.size()) < count; ++k) out.push_back(CVec::Unit(m, k));
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m && static_cast<int>(out.size()) < count; ++j) {
            CVec v = CVec::Zero(m);
            v(i) = v(j) = 1.0 / std::sqrt(2.0);
            out.push_back(v);
        }
    std::mt19937_64 rng(mix_seed(seed, 0));
    std::normal_distribution<double> normal;
    while (static_cast<int>(out.size()) < count) {
        CVec v(m);
        for (int k = 0; k < m; ++k) v(k) = cplx(normal(rng), normal(rng));
        if (v.norm() > 1e-12) out.push_back(v / v.norm());
    }
    return out;
}

CVec evaluate(const ProperMapSpec& f, const CVec& z) {
    const std::vector<cplx> in(z.data(), z.data() + z.size());
    const std::vector<cplx> out = f.evaluate<cplx>(std::span<const cplx>(in));
    return Eigen::Map<const CVec>(out.data(), static_cast<Eigen::Index>(out.size()));
}

BallPoint evaluate(const ProperMapSpec& f, const BallPoint& z) {
    CVec w = evaluate(f, z.coords());
    const double gap = one_minus_norm_sq(w);
    return BallPoint::with_gap(std::move(w), gap);
}

double properness_residual(const ProperMapSpec& f, int samples) {
    double worst = 0.0;
    for (const CVec& v : deterministic_directions(f.domain_dim, samples, 0x5eed))
        worst = std::max(worst, std::abs(evaluate(f, v).norm() - 1.0));
    return worst;
}

void certify_proper(const ProperMapSpec& f, double tol) {
    f.validate();
    const double residual = properness_residual(f, std::max(32 * f.domain_dim, 64));
    if (!(residual <= tol)) {
        std::ostringstream os;
        os << "map is not proper: boundary residual max|‖f(v)‖ - 1| = " << residual << " exceeds " << tol;
        throw InputError(os.str());
    }
}

namespace {

// 1 - ‖w‖ through the compensated gap, so identical coordinates give identical values.
double distance_to_sphere(const CVec& w) { return one_minus_norm_sq(w) / (1.0 + w.norm()); }

}  // namespace

LipschitzEstimate lipschitz_boundary_constant(const ProperMapSpec& f, int density) {
    if (density < 1) throw InputError("lipschitz_boundary_constant: density must be positive");
    LipschitzEstimate est;
    est.radial_levels = 7 * density + 1;
    est.directions = 64 * density;
    const auto dirs = deterministic_directions(f.domain_dim, est.directions, 0x11b5);
    std::vector<double> best(dirs.size(), -1.0);
    std::vector<CVec> where(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t i) {
        for (int level = 0; level < est.radial_levels; ++level) {
            const double s = 1.0 + static_cast<double>(level) / density;
            const CVec z = (1.0 - std::pow(10.0, -s)) * dirs[i];
            const double ratio = distance_to_sphere(evaluate(f, z)) / distance_to_sphere(z);
            if (ratio > best[i]) {
                best[i] = ratio;
                where[i] = z;
            }
        }
    });
    std::size_t arg = 0;
    for (std::size_t i = 1; i < best.size(); ++i)
        if (best[i] > best[arg]) arg = i;
    est.C = best[arg];
    est.argmax = where[arg];
    return est;
}

double beta_constant(const ProperMapSpec& f, double C) {
    const CVec f0 = evaluate(f, CVec::Zero(f.domain_dim));
    if (!(C > 0.0)) throw InputError("beta_constant: C must be positive");
    if (f0.norm() == 0.0 && C < 1.0)
        throw InputError("beta_constant: C < 1 is impossible for a map fixing the origin");
    const double coarse = lipschitz_boundary_constant(f, 1).C;
    if (C < coarse) {
        std::ostringstream os;
        os << "beta_constant: C = " << C << " is below the grid estimate " << coarse;
        throw InputError(os.str());
    }
    return 0.5 * std::log(2.0 * C) + dist_ball(BallPoint::origin(f.target_dim), BallPoint(f0));
}

SymmetryPair verify_symmetry_pair(const ProperMapSpec& f, const Automorphism& phi, const Automorphism& psi,
                                  int sample_count, std::uint64_t seed) {
    return verify_symmetry_pair(MapChain(f), phi, psi, sample_count, seed);
}

SymmetryPair verify_symmetry_pair(const MapChain& f, const Automorphism& phi, const Automorphism& psi,
                                  int sample_count, std::uint64_t seed) {
    if (phi.dim() != f.in_dim() || psi.dim() != f.out_dim())
        throw InputError("verify_symmetry_pair: automorphism dimensions do not match the map");
    std::mt19937_64 rng(mix_seed(seed, 0));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int m = f.in_dim();
    auto image = [&](const CVec& z) {
        CVec w = f(z);
        const double gap = one_minus_norm_sq(w);
        return BallPoint::with_gap(std::move(w), gap);
    };
    double residual = 0.0;
    for (int s = 0; s < sample_count; ++s) {
        CVec z(m);
        for (int k = 0; k < m; ++k) z(k) = cplx(normal(rng), normal(rng));
        z *= 0.95 * std::pow(unif(rng), 1.0 / (2.0 * m)) / z.norm();
        const CVec lhs = apply_ball(psi, image(z)).coords();
        const CVec rhs = f(apply_ball(phi, BallPoint(z)).coords());
        residual = std::max(residual, (lhs - rhs).norm());
    }
    return {phi, psi, residual};
}

Automorphism block_extend(const Automorphism& phi, int M) {
    const int m = phi.dim();
    if (M < m) throw InputError("block_extend: need M >= m");
    const CMat& g = phi.matrix();
    CMat out = CMat::Identity(M + 1, M + 1);
    out.topLeftCorner(m, m) = g.topLeftCorner(m, m);
    out.block(0, M, m, 1) = g.topRightCorner(m, 1);
    out.block(M, 0, 1, m) = g.bottomLeftCorner(1, m);
    out(M, M) = g(m, m);
    return Automorphism(std::move(out));
}

MapChain siegel_conjugate(const ProperMapSpec& f) {
    return MapChain(stage::CayleyToBall{f.domain_dim})
        .then(stage::Polynomial{f})
        .then(stage::CayleyToSiegel{f.target_dim});
}

double radial_deviation(const ProperMapSpec& f, const CVec& v, double t) {
    const CVec z = t * v;
    const BallPoint image = evaluate(f, BallPoint::with_gap(z, one_minus_norm_sq(z)));
    const CVec scaled = t * evaluate(f, v);
    return dist_ball(image, BallPoint::with_gap(scaled, one_minus_norm_sq(scaled)));
}

RadialSweep radial_sweep(const ProperMapSpec& f, const std::vector<CVec>& directions, const std::vector<int>& ks,
                         RadialBoundConstants constants) {
    if (directions.empty() || ks.empty()) throw InputError("radial_sweep: empty grid");
    RadialSweep sweep;
    const CVec f0 = evaluate(f, CVec::Zero(f.domain_dim));
    constants.base_offset = dist_ball(BallPoint::origin(f.target_dim), BallPoint(f0));
    sweep.constants = constants;
    sweep.rows.resize(directions.size() * ks.size());
    parallel_for(sweep.rows.size(), [&](std::size_t cell) {
        const std::size_t i = cell / ks.size();
        const std::size_t j = cell % ks.size();
        if (std::abs(directions[i].norm() - 1.0) > default_tolerances().closure)
            throw InputError("radial_sweep: directions must be unit vectors");
        const double t = 1.0 - std::pow(10.0, -ks[j]);
        sweep.rows[cell] = {static_cast<int>(i), ks[j], t, radial_deviation(f, directions[i], t)};
    });
    for (const auto& row : sweep.rows) sweep.sup = std::max(sweep.sup, row.deviation);
    if (ks.size() >= 3) {
        for (std::size_t i = 0; i < directions.size(); ++i) {
            const double last = sweep.rows[i * ks.size() + ks.size() - 1].deviation;
            const double ref = sweep.rows[i * ks.size() + ks.size() - 3].deviation;
            sweep.stabilization = std::max(sweep.stabilization, std::abs(last - ref));
        }
    }
    return sweep;
}

}  // namespace chyp
