#pragma once
// Two-mode Gaussian attacks: the correlated thermal ancilla pair Eve injects
// into the forward (E1) and backward (E2) channel.

#include <string_view>

#include "cvqkd/gaussian.hpp"

namespace cvqkd {

struct TwoModeAttack {
    double v_e1 = 1.0;
    double v_e2 = 1.0;
    double c_x = 0.0;
    double c_p = 0.0;

    /// [[V_E1 I, diag(c_x, c_p)], [diag(c_x, c_p), V_E2 I]]
    GaussianState to_state() const;

    /// Positive definite and nu_minus >= 1 - kPhysicalTolerance.
    bool physical() const;
    /// Physical and nu_tilde_minus >= 1 - kPhysicalTolerance.
    bool separable() const;
};

enum class AttackClass { Unphysical, SeparableIndependent, Separable, Entangled };

std::string_view to_string(AttackClass c);

/// Smaller symplectic eigenvalue of the ancilla pair, closed form.
/// Throws NumericalDomainError for parameters far outside the physical set.
double nu_minus(const TwoModeAttack& attack);
/// Smaller symplectic eigenvalue of the partial transpose.
double nu_tilde_minus(const TwoModeAttack& attack);

AttackClass classify(const TwoModeAttack& attack);

enum class RayCriterion { Physical, Separable };

/// Largest t >= 0 with (c_x, c_p) = t (u_x, u_p) meeting `criterion`, by
/// bisection to 1e-11. The direction is used as given, so t is measured in
/// correlation units along each axis: ray (1, -1) on V = 3 gives sqrt(8).
/// Results below sqrt(machine epsilon * V_E1 V_E2) are reported as 0.
double max_correlation_on_ray(double v_e1, double v_e2, double u_x, double u_p,
                              RayCriterion criterion);

/// Pure 4-mode state (E1, E2, e1, e2) whose first two modes carry the attack.
GaussianState dilate_attack(const TwoModeAttack& attack);

/// Two EPR pairs of variance V_E + c and V_E - c; their travelling arms meet
/// on a balanced beam splitter. Output modes (E1, E2, kept arm of the
/// V_E + c pair, kept arm of the V_E - c pair); the (E1, E2) marginal is
/// [[V_E I, c I], [c I, V_E I]].
GaussianState dilate_optimal_symmetric(double v_e, double c_opt);

}  // namespace cvqkd
