#include "chyp/polynomial.hpp"

#include <numeric>
#include <sstream>

namespace chyp {

int Monomial::degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

int ProperMapSpec::degree() const {
    int d = 0;
    for (const auto& component : components)
        for (const auto& mono : component) d = std::max(d, mono.degree());
    return d;
}

void ProperMapSpec::validate(int max_degree) const {
    if (domain_dim < 1) throw InputError("map spec: domain_dim must be positive");
    if (target_dim < domain_dim) throw InputError("map spec: target_dim must be at least domain_dim");
    if (static_cast<int>(components.size()) != target_dim) {
        std::ostringstream os;
        os << "map spec: expected " << target_dim << " components, got " << components.size();
        throw InputError(os.str());
    }
    for (std::size_t j = 0; j < components.size(); ++j) {
        for (const auto& mono : components[j]) {
            if (static_cast<int>(mono.exponents.size()) != domain_dim) {
                std::ostringstream os;
                os << "map spec: component " << j + 1 << " has a monomial with " << mono.exponents.size()
                   << " exponents, expected " << domain_dim;
                throw InputError(os.str());
            }
            for (int e : mono.exponents)
                if (e < 0) throw InputError("map spec: negative exponent");
            if (!std::isfinite(mono.coef.real()) || !std::isfinite(mono.coef.imag()))
                throw InputError("map spec: non-finite coefficient");
            if (std::abs(mono.coef) > kMaxCoefficient) {
                std::ostringstream os;
                os << "map spec: coefficient magnitude " << std::abs(mono.coef) << " exceeds cap " << kMaxCoefficient;
                throw InputError(os.str());
            }
        }
    }
    if (degree() > max_degree) {
        std::ostringstream os;
        os << "map spec: degree " << degree() << " exceeds cap " << max_degree;
        throw InputError(os.str());
    }
}

}  // namespace chyp
