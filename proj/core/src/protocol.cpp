#include "cvqkd/protocol.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cvqkd/errors.hpp"

namespace cvqkd {
namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw InvalidArgument(message);
}

// Bob's key variables from the dilated B1 and B3 heterodynes.
std::array<LinearOutcome, 2> bob_key_outcomes(const ProtocolParams& p, const HeterodyneDilation& b1,
                                              const HeterodyneDilation& b3) {
    const double g = std::numbers::sqrt2 * p.estimator_gain();
    const double noise = p.electronic_noise * (1.0 + g * g);
    return {LinearOutcome{{{b3.x_quadrature, 1.0}, {b1.x_quadrature, -g}}, noise},
            LinearOutcome{{{b3.p_quadrature, 1.0}, {b1.p_quadrature, g}}, noise}};
}

struct DilatedBob {
    HeterodyneDilation b1;
    HeterodyneDilation b3;
};

DilatedBob dilate_bob(const GaussianState& full) {
    auto b1 = heterodyne_dilate(full, mode::B1);
    auto b3 = heterodyne_dilate(b1.state, mode::B3);
    // b1's outcome indices are unchanged by appending another mode.
    return {std::move(b1), std::move(b3)};
}

MutualInformation mutual_information_from(const ProtocolParams& p, const DilatedBob& bob) {
    const auto alice = heterodyne_dilate(bob.b3.state, mode::A1);
    const auto outcomes = bob_key_outcomes(p, bob.b1, bob.b3);
    const int alice_p_mode = alice.p_quadrature / 2;
    const int kept[] = {mode::A1, alice_p_mode};
    const Matrix& cm = alice.state.cm();
    MutualInformation mi;
    mi.alice_variances = {cm(alice.x_quadrature, alice.x_quadrature),
                          cm(alice.p_quadrature, alice.p_quadrature)};
    for (int q = 0; q < 2; ++q) {
        const auto cond = condition_on_linear_outcomes(alice.state, std::span(&outcomes[static_cast<std::size_t>(q)], 1), kept);
        // x of A1 sits at local index 0, p of the appended mode at 3.
        const double v = q == 0 ? cond.state.cm()(0, 0) : cond.state.cm()(3, 3);
        mi.conditional_variances[static_cast<std::size_t>(q)] = v;
        mi.i_ab += 0.5 * std::log2(mi.alice_variances[static_cast<std::size_t>(q)] / v);
    }
    return mi;
}

HolevoResult holevo_from(const ProtocolParams& p, const GaussianState& full, const DilatedBob& bob) {
    HolevoResult h;
    h.spectrum_unconditioned = symplectic_eigenvalues(reduce(full, mode::trusted));
    h.eve_entropy = von_neumann_entropy(reduce(full, mode::eve));
    const auto outcomes = bob_key_outcomes(p, bob.b1, bob.b3);
    const auto cond = condition_on_linear_outcomes(bob.b3.state, outcomes, mode::eve);
    h.spectrum_conditioned = symplectic_eigenvalues(cond.state);
    h.chi_be = entropy_from_spectrum(h.spectrum_unconditioned) - entropy_from_spectrum(h.spectrum_conditioned);
    return h;
}

}  // namespace

double ProtocolParams::ancilla_variance() const {
    return 1.0 + transmittance * excess_noise / (1.0 - transmittance);
}

double ProtocolParams::estimator_gain() const {
    if (k_override) return *k_override;
    return std::sqrt(0.5 * transmittance * transmittance * eta * (v_b - 1.0) / (v_b + 1.0));
}

void ProtocolParams::validate() const {
    require(v_a >= 1.0, "v_a must be >= 1");
    require(v_b >= 1.0, "v_b must be >= 1");
    require(eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
    require(beta >= 0.0 && beta <= 1.0, "beta must lie in [0, 1]");
    require(transmittance > 0.0 && transmittance < 1.0, "transmittance must lie in (0, 1)");
    require(excess_noise >= 0.0 && std::isfinite(excess_noise), "excess_noise must be >= 0");
    require(electronic_noise >= 0.0 && std::isfinite(electronic_noise), "electronic_noise must be >= 0");
    require(!k_override || std::isfinite(*k_override), "k_override must be finite");
}

TwoModeAttack symmetric_attack(const ProtocolParams& p, double c_x, double c_p) {
    const double v = p.ancilla_variance();
    return {v, v, c_x, c_p};
}

GaussianState initial_cm(double v_a, double v_b) {
    require(v_a >= 1.0 && v_b >= 1.0, "initial_cm: variances must be >= 1");
    // EPR(V_B) on (B1, B2) and EPR(V_A) on (A1, A2), ordered B1 A1 A2 B2.
    const int order[] = {0, 2, 3, 1};
    return permute(tensor(epr_state(v_b), epr_state(v_a)), order);
}

GaussianState propagate_full(const ProtocolParams& protocol, const GaussianState& attack_dilation) {
    protocol.validate();
    if (attack_dilation.modes() != 4) throw InvalidArgument("propagate_full: attack dilation must have 4 modes");
    // Slots: 0 B1, 1 A1, 2 A2, 3 B2, 4 E1, 5 E2, 6 e1, 7 e2.
    auto s = tensor(initial_cm(protocol.v_a, protocol.v_b), attack_dilation);
    const double t = protocol.transmittance;
    // Forward channel: slot 3 <- A_in, slot 4 <- E1'.
    s = apply_symplectic(s, beam_splitter(8, t, 3, 4));
    // Alice: slot 3 <- A_out = sqrt(eta) A_in + sqrt(1-eta) A2,
    //        slot 2 <- A3 = -sqrt(1-eta) A_in + sqrt(eta) A2.
    s = apply_symplectic(s, beam_splitter(8, protocol.eta, 3, 2));
    // Backward channel: slot 3 <- B3, slot 5 <- E2'.
    return apply_symplectic(s, beam_splitter(8, t, 3, 5));
}

GaussianState propagate_full(const ProtocolParams& protocol, const TwoModeAttack& attack) {
    protocol.validate();
    return propagate_full(protocol, dilate_attack(attack));
}

GaussianState closed_form_cm(const ProtocolParams& p, const TwoModeAttack& attack) {
    p.validate();
    if (!attack.physical()) throw UnphysicalParameters("closed_form_cm: attack is unphysical (nu_minus < 1)");
    const double t = p.transmittance;
    const double eta = p.eta;
    // E1 feeds A3 and B3, E2 only B3; with V_E1 = V_E2 these reduce to the
    // single-V_E expressions.
    const double ve1 = attack.v_e1;
    const double ve2 = attack.v_e2;
    const double t_prime = std::sqrt(t * (1.0 - eta));
    const double ca = std::sqrt(p.v_a * p.v_a - 1.0);
    const double cb = std::sqrt(p.v_b * p.v_b - 1.0);
    const double mix = std::sqrt(t * eta * (1.0 - eta));
    const double v_prime =
        t * (1.0 - eta) * p.v_a + t * t * eta * p.v_b + t * eta * (1.0 - t) * ve1 + (1.0 - t) * ve2;
    const double c_prime = mix * p.v_a - t * mix * p.v_b - (1.0 - t) * mix * ve1;
    const double v_a3 = eta * p.v_a + (1.0 - eta) * (t * p.v_b + (1.0 - t) * ve1);

    Matrix cm = Matrix::Zero(8, 8);
    auto diag = [&cm](int i, int j, double x, double p_) {
        cm(2 * i, 2 * j) = cm(2 * j, 2 * i) = x;
        cm(2 * i + 1, 2 * j + 1) = cm(2 * j + 1, 2 * i + 1) = p_;
    };
    auto sz = [&diag](int i, int j, double c) { diag(i, j, c, -c); };
    diag(0, 0, p.v_b, p.v_b);
    diag(1, 1, p.v_a, p.v_a);
    sz(0, 2, -t_prime * cb);
    sz(0, 3, std::sqrt(eta) * t * cb);
    sz(1, 2, std::sqrt(eta) * ca);
    sz(1, 3, t_prime * ca);
    diag(2, 2, v_a3, v_a3);
    diag(2, 3, c_prime - attack.c_x * (1.0 - t) * std::sqrt(1.0 - eta),
         c_prime - attack.c_p * (1.0 - t) * std::sqrt(1.0 - eta));
    diag(3, 3, v_prime + 2.0 * attack.c_x * (1.0 - t) * std::sqrt(t * eta),
         v_prime + 2.0 * attack.c_p * (1.0 - t) * std::sqrt(t * eta));
    return GaussianState(std::move(cm));
}

MutualInformation mutual_information(const ProtocolParams& protocol, const TwoModeAttack& attack) {
    const auto full = propagate_full(protocol, attack);
    return mutual_information_from(protocol, dilate_bob(full));
}

HolevoResult holevo_rr(const ProtocolParams& protocol, const GaussianState& attack_dilation) {
    const auto full = propagate_full(protocol, attack_dilation);
    return holevo_from(protocol, full, dilate_bob(full));
}

HolevoResult holevo_rr(const ProtocolParams& protocol, const TwoModeAttack& attack) {
    protocol.validate();
    return holevo_rr(protocol, dilate_attack(attack));
}

KeyRateReport key_rate(const ProtocolParams& protocol, const TwoModeAttack& attack) {
    const auto full = propagate_full(protocol, attack);
    const auto bob = dilate_bob(full);
    const auto mi = mutual_information_from(protocol, bob);
    auto h = holevo_from(protocol, full, bob);
    KeyRateReport r;
    r.i_ab = mi.i_ab;
    r.chi_be = h.chi_be;
    r.key_rate = protocol.beta * mi.i_ab - h.chi_be;
    r.spectrum_unconditioned = std::move(h.spectrum_unconditioned);
    r.spectrum_conditioned = std::move(h.spectrum_conditioned);
    r.conditional_variances = mi.conditional_variances;
    r.attack = attack;
    return r;
}

KeyRateReport key_rate(const ProtocolParams& protocol, double c_x, double c_p) {
    protocol.validate();
    return key_rate(protocol, symmetric_attack(protocol, c_x, c_p));
}

KeyRateReport one_way_key_rate(double v_mod, double transmittance, double excess_noise, double beta) {
    require(v_mod >= 1.0, "one_way_key_rate: v_mod must be >= 1");
    require(transmittance > 0.0 && transmittance < 1.0, "one_way_key_rate: transmittance must lie in (0, 1)");
    require(excess_noise >= 0.0, "one_way_key_rate: excess_noise must be >= 0");
    require(beta >= 0.0 && beta <= 1.0, "one_way_key_rate: beta must lie in [0, 1]");
    const double ve = 1.0 + transmittance * excess_noise / (1.0 - transmittance);

    // Slots: 0 A, 1 B, 2 E, 3 e. The channel leaves B in slot 1 and E' in slot 2.
    auto s = tensor(epr_state(v_mod), epr_state(ve));
    s = apply_symplectic(s, beam_splitter(4, transmittance, 1, 2));
    const int ab[] = {0, 1};
    const int eve[] = {2, 3};

    const auto bob = heterodyne_dilate(s, 1);
    const auto alice = heterodyne_dilate(bob.state, 0);
    const LinearOutcome bx{{{bob.x_quadrature, 1.0}}};
    const LinearOutcome bp{{{bob.p_quadrature, 1.0}}};

    KeyRateReport r;
    const int kept_alice[] = {0, alice.p_quadrature / 2};
    const Matrix& cm = alice.state.cm();
    const double vx = cm(alice.x_quadrature, alice.x_quadrature);
    const double vp = cm(alice.p_quadrature, alice.p_quadrature);
    const auto cx = condition_on_linear_outcomes(alice.state, std::span(&bx, 1), kept_alice);
    const auto cp = condition_on_linear_outcomes(alice.state, std::span(&bp, 1), kept_alice);
    r.conditional_variances = {cx.state.cm()(0, 0), cp.state.cm()(3, 3)};
    r.i_ab = 0.5 * std::log2(vx / r.conditional_variances[0]) + 0.5 * std::log2(vp / r.conditional_variances[1]);

    const LinearOutcome both[] = {bx, bp};
    r.spectrum_unconditioned = symplectic_eigenvalues(reduce(s, ab));
    r.spectrum_conditioned = symplectic_eigenvalues(condition_on_linear_outcomes(bob.state, both, eve).state);
    r.chi_be = entropy_from_spectrum(r.spectrum_unconditioned) - entropy_from_spectrum(r.spectrum_conditioned);
    r.key_rate = beta * r.i_ab - r.chi_be;
    return r;
}

}  // namespace cvqkd
