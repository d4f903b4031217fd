#include "chyp/map_chain.hpp"

#include <algorithm>
#include <sstream>

namespace chyp {

namespace {

struct InDim {
    int operator()(const stage::Mobius& s) const { return s.g.dim(); }
    int operator()(const stage::Polynomial& s) const { return s.spec.domain_dim; }
    int operator()(const stage::CayleyToSiegel& s) const { return s.dim; }
    int operator()(const stage::CayleyToBall& s) const { return s.dim; }
    int operator()(const stage::SiegelFlow& s) const { return s.dim; }
    int operator()(const stage::Linear& s) const { return static_cast<int>(s.a.cols()); }
};

struct OutDim {
    int operator()(const stage::Mobius& s) const { return s.g.dim(); }
    int operator()(const stage::Polynomial& s) const { return s.spec.target_dim; }
    int operator()(const stage::CayleyToSiegel& s) const { return s.dim; }
    int operator()(const stage::CayleyToBall& s) const { return s.dim; }
    int operator()(const stage::SiegelFlow& s) const { return s.dim; }
    int operator()(const stage::Linear& s) const { return static_cast<int>(s.a.rows()); }
};

}  // namespace

int stage_in_dim(const Stage& s) { return std::visit(InDim{}, s); }
int stage_out_dim(const Stage& s) { return std::visit(OutDim{}, s); }

MapChain::MapChain(Stage first)
    : stages_{std::move(first)}, in_dim_(stage_in_dim(stages_.front())), out_dim_(stage_out_dim(stages_.front())) {}

MapChain::MapChain(const ProperMapSpec& spec) : MapChain(Stage{stage::Polynomial{spec}}) {}

MapChain MapChain::then(Stage next) const {
    if (stages_.empty()) return MapChain(std::move(next));
    if (stage_in_dim(next) != out_dim_) throw InputError("MapChain: stage dimension mismatch");
    MapChain out = *this;
    out.out_dim_ = stage_out_dim(next);
    out.stages_.push_back(std::move(next));
    return out;
}

MapChain MapChain::then(const MapChain& next) const {
    MapChain out = *this;
    for (const auto& st : next.stages()) out = out.then(st);
    return out;
}

CVec MapChain::operator()(const CVec& z) const {
    if (z.size() != in_dim_) throw InputError("MapChain: input dimension mismatch");
    std::vector<cplx> v(z.data(), z.data() + z.size());
    v = apply(std::move(v));
    return Eigen::Map<const CVec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

JetExpansion jet_at(const MapChain& map, const CVec& base, const JetOptions& options) {
    const Eigen::Index m = map.in_dim();
    if (base.size() != m) throw InputError("jet_at: base point dimension mismatch");
    std::vector<Jet> seed;
    seed.reserve(m);
    for (Eigen::Index k = 0; k < m; ++k) seed.push_back(Jet::variable(base(k), k, m));
    const std::vector<Jet> out = map.apply(std::move(seed));

    JetExpansion jet;
    jet.base = base;
    const auto M = static_cast<Eigen::Index>(out.size());
    jet.value.resize(M);
    jet.first = CMat::Zero(M, m);
    jet.second.assign(M, CMat::Zero(m, m));
    for (Eigen::Index j = 0; j < M; ++j) {
        jet.value(j) = out[j].v;
        if (out[j].is_constant()) continue;
        jet.first.row(j) = out[j].d.transpose();
        CMat h = out[j].dd;
        // Enforce exact symmetry; both triangles agree up to rounding already.
        for (Eigen::Index k = 0; k < m; ++k)
            for (Eigen::Index l = k + 1; l < m; ++l) h(l, k) = h(k, l);
        jet.second[j] = std::move(h);
    }
    if (options.finite_difference_check) {
        jet.error_norm = finite_difference_discrepancy(map, jet, options.step);
        if (jet.error_norm > options.failure_threshold) {
            std::ostringstream os;
            os << "jet_at: chain-rule jet disagrees with finite differences (relative error " << jet.error_norm
               << ")";
            throw NumericError(os.str());
        }
    }
    return jet;
}

JetExpansion jet_at_zero(const MapChain& map, const JetOptions& options) {
    return jet_at(map, CVec::Zero(map.in_dim()), options);
}

CVec evaluate_quadratic_model(const JetExpansion& jet, const CVec& z) {
    if (z.size() != jet.domain_dim()) throw InputError("evaluate_quadratic_model: dimension mismatch");
    const CVec dz = z - jet.base;
    CVec out = jet.value + jet.first * dz;
    for (Eigen::Index j = 0; j < out.size(); ++j) out(j) += 0.5 * (dz.transpose() * jet.second[j] * dz)(0);
    return out;
}

double finite_difference_discrepancy(const MapChain& map, const JetExpansion& jet, double h) {
    const Eigen::Index m = jet.domain_dim();
    const Eigen::Index M = jet.target_dim();
    auto at = [&](Eigen::Index k, double sk, Eigen::Index l, double sl) {
        CVec z = jet.base;
        if (k >= 0) z(k) += sk * h;
        if (l >= 0) z(l) += sl * h;
        return map(z);
    };
    auto rel = [](cplx approx, cplx exact) { return std::abs(approx - exact) / std::max(1.0, std::abs(exact)); };

    double worst = 0.0;
    const CVec center = map(jet.base);
    for (Eigen::Index k = 0; k < m; ++k) {
        const CVec plus = at(k, 1, -1, 0);
        const CVec minus = at(k, -1, -1, 0);
        const CVec d1 = (plus - minus) / (2.0 * h);
        const CVec d2 = (plus - 2.0 * center + minus) / (h * h);
        for (Eigen::Index j = 0; j < M; ++j) {
            worst = std::max(worst, rel(d1(j), jet.first(j, k)));
            worst = std::max(worst, rel(d2(j), jet.second[j](k, k)));
        }
        for (Eigen::Index l = k + 1; l < m; ++l) {
            const CVec mixed = (at(k, 1, l, 1) - at(k, 1, l, -1) - at(k, -1, l, 1) + at(k, -1, l, -1)) / (4.0 * h * h);
            for (Eigen::Index j = 0; j < M; ++j) worst = std::max(worst, rel(mixed(j), jet.second[j](k, l)));
        }
    }
    return worst;
}

}  // namespace chyp
