#include "cvqkd/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cvqkd/errors.hpp"

namespace cvqkd {
namespace {

// Smaller symplectic eigenvalue of a two-mode state from its seralian,
// determinant and the discriminant delta^2 - 4 det. The discriminant is
// passed in expanded form and nu^2 is taken as 2 det / (delta + sqrt(disc)),
// so neither step cancels near the vacuum.
double smaller_eigenvalue(double delta, double det, double disc) {
    const double scale = std::max(1.0, delta * delta);
    if (disc < -1e-12 * scale)
        throw NumericalDomainError("negative radicand " + std::to_string(disc) +
                                   " in two-mode symplectic eigenvalue");
    const double denom = delta + std::sqrt(std::max(disc, 0.0));
    if (!(denom > 0.0) || det < -1e-12 * scale)
        throw NumericalDomainError("two-mode covariance matrix is not positive definite");
    return std::sqrt(std::max(2.0 * det / denom, 0.0));
}

// delta^2 - 4 det = (V1^2 - V2^2)^2 + 4 (V1 cx + V2 cp)(V2 cx + V1 cp)
double discriminant(double v1, double v2, double cx, double cp) {
    const double d = v1 * v1 - v2 * v2;
    return d * d + 4.0 * (v1 * cx + v2 * cp) * (v2 * cx + v1 * cp);
}

double determinant(const TwoModeAttack& a) {
    const double v = a.v_e1 * a.v_e2;
    return (v - a.c_x * a.c_x) * (v - a.c_p * a.c_p);
}

bool positive_minors(const TwoModeAttack& a) {
    const double v = a.v_e1 * a.v_e2;
    return a.v_e1 > 0.0 && a.v_e2 > 0.0 && v - a.c_x * a.c_x > 0.0 && v - a.c_p * a.c_p > 0.0;
}

bool meets(const TwoModeAttack& a, RayCriterion criterion) {
    return criterion == RayCriterion::Physical ? a.physical() : a.separable();
}

// Exact boundary test for the ray search. The tolerant predicates above
// would let the bisection drift ~sqrt(tol) past the true boundary.
bool strictly_meets(const TwoModeAttack& a, RayCriterion criterion) {
    if (!positive_minors(a)) return false;
    try {
        if (nu_minus(a) < 1.0) return false;
        return criterion == RayCriterion::Physical || nu_tilde_minus(a) >= 1.0;
    } catch (const NumericalDomainError&) {
        return false;
    }
}

}  // namespace

GaussianState TwoModeAttack::to_state() const {
    Matrix cm = Matrix::Zero(4, 4);
    cm(0, 0) = cm(1, 1) = v_e1;
    cm(2, 2) = cm(3, 3) = v_e2;
    cm(0, 2) = cm(2, 0) = c_x;
    cm(1, 3) = cm(3, 1) = c_p;
    return GaussianState(std::move(cm));
}

bool TwoModeAttack::physical() const {
    if (!positive_minors(*this)) return false;
    try {
        return nu_minus(*this) >= 1.0 - kPhysicalTolerance;
    } catch (const NumericalDomainError&) {
        return false;
    }
}

bool TwoModeAttack::separable() const {
    if (!physical()) return false;
    try {
        return nu_tilde_minus(*this) >= 1.0 - kPhysicalTolerance;
    } catch (const NumericalDomainError&) {
        return false;
    }
}

std::string_view to_string(AttackClass c) {
    switch (c) {
        case AttackClass::Unphysical: return "unphysical";
        case AttackClass::SeparableIndependent: return "independent";
        case AttackClass::Separable: return "separable";
        case AttackClass::Entangled: return "entangled";
    }
    return "unknown";
}

double nu_minus(const TwoModeAttack& a) {
    const double delta = a.v_e1 * a.v_e1 + a.v_e2 * a.v_e2 + 2.0 * a.c_x * a.c_p;
    return smaller_eigenvalue(delta, determinant(a), discriminant(a.v_e1, a.v_e2, a.c_x, a.c_p));
}

double nu_tilde_minus(const TwoModeAttack& a) {
    const double delta = a.v_e1 * a.v_e1 + a.v_e2 * a.v_e2 - 2.0 * a.c_x * a.c_p;
    return smaller_eigenvalue(delta, determinant(a), discriminant(a.v_e1, a.v_e2, a.c_x, -a.c_p));
}

AttackClass classify(const TwoModeAttack& a) {
    if (!a.physical()) return AttackClass::Unphysical;
    if (nu_tilde_minus(a) < 1.0 - kPhysicalTolerance) return AttackClass::Entangled;
    if (std::abs(a.c_x) <= 1e-12 && std::abs(a.c_p) <= 1e-12) return AttackClass::SeparableIndependent;
    return AttackClass::Separable;
}

double max_correlation_on_ray(double v_e1, double v_e2, double u_x, double u_p, RayCriterion criterion) {
    if (u_x == 0.0 && u_p == 0.0) throw InvalidArgument("max_correlation_on_ray: zero direction");
    auto at = [&](double t) { return TwoModeAttack{v_e1, v_e2, t * u_x, t * u_p}; };
    if (!meets(at(0.0), criterion)) return 0.0;
    // Beyond this the 2x2 quadrature blocks lose positivity.
    double lo = 0.0;
    double hi = std::sqrt(v_e1 * v_e2) / std::max(std::abs(u_x), std::abs(u_p));
    while (hi - lo > 1e-11) {
        const double mid = 0.5 * (lo + hi);
        if (strictly_meets(at(mid), criterion)) lo = mid;
        else hi = mid;
    }
    // Near V = 1 the eigenvalue deficit is quadratic in t, so in double
    // precision the boundary is only resolved down to sqrt(eps) * scale.
    const double floor = std::sqrt(std::numeric_limits<double>::epsilon() * v_e1 * v_e2);
    return lo < floor ? 0.0 : lo;
}

GaussianState dilate_attack(const TwoModeAttack& attack) {
    if (!attack.physical())
        throw UnphysicalParameters("dilate_attack: attack is unphysical (nu_minus < 1)");
    return purify(attack.to_state());
}

GaussianState dilate_optimal_symmetric(double v_e, double c_opt) {
    const double v1 = v_e + c_opt;
    const double v2 = v_e - c_opt;
    if (!(v1 >= 1.0 && v2 >= 1.0))
        throw InvalidArgument("dilate_optimal_symmetric: requires V_E - |C_opt| >= 1");
    // (kept1, a, kept2, b) -> (a, b, kept1, kept2)
    const int order[] = {1, 3, 0, 2};
    auto state = permute(tensor(epr_state(v1), epr_state(v2)), order);
    return apply_symplectic(state, beam_splitter(4, 0.5, 0, 1, BeamSplitterSign::Flipped));
}

}  // namespace cvqkd
