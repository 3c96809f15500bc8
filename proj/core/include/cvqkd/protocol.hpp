#pragma once
// Two-way coherent-state CV-QKD in reverse reconciliation under a two-mode
// attack, plus the one-way coherent-state baseline.
//
// Entanglement-based picture. Bob holds an EPR pair (B1, B2) of variance
// V_B and sends B2 through the forward channel. Alice holds (A1, A2) of
// variance V_A, heterodynes A1, and mixes the received mode A_in with A2 on
// a beam splitter of transmittance eta; A_out goes back through the
// backward channel to Bob (B3) and A3 stays with her. Both channels have
// transmittance T, and Eve injects E1 and E2 from a pure reservoir.
// Bob heterodynes B1 and B3 and keys on
//
//     x_B = x'_B3 - k x_ref,   p_B = p'_B3 - k p_ref
//
// where (x_ref, p_ref) = sqrt(2) (x'_B1, -p'_B1) is the amplitude his
// heterodyne of B1 prepares on B2 (unnormalised outcome, conjugate p).
// Primes denote normalised heterodyne outcomes, variance (V + 1) / 2.

#include <array>
#include <optional>
#include <vector>

#include "cvqkd/attack.hpp"
#include "cvqkd/gaussian.hpp"

namespace cvqkd {

struct ProtocolParams {
    double v_a = 20.0;
    double v_b = 20.0;
    double eta = 0.75;
    double beta = 1.0;
    double transmittance = 0.5;
    double excess_noise = 0.0;
    /// Added to each of Bob's heterodyne outcome variables.
    double electronic_noise = 0.0;
    std::optional<double> k_override;

    /// 1 + T eps / (1 - T)
    double ancilla_variance() const;
    /// sqrt(0.5 T^2 eta (V_B - 1) / (V_B + 1)) unless overridden; this is the
    /// variance-optimal gain on the unnormalised reference.
    double estimator_gain() const;
    /// Throws InvalidArgument naming the offending field.
    void validate() const;
};

/// Eve's symmetric attack for these channel parameters: V_E1 = V_E2 = V_E.
TwoModeAttack symmetric_attack(const ProtocolParams& p, double c_x, double c_p);

struct KeyRateReport {
    double i_ab = 0.0;
    double chi_be = 0.0;
    double key_rate = 0.0;
    /// Trusted-side spectrum (equals Eve's by purity), descending.
    std::vector<double> spectrum_unconditioned;
    /// Eve's spectrum conditioned on Bob's key variables, descending.
    std::vector<double> spectrum_conditioned;
    /// Alice's x and p heterodyne outcome variances given Bob's key.
    std::array<double, 2> conditional_variances{};
    std::optional<TwoModeAttack> attack;
};

/// Mode slots of the propagated global state.
namespace mode {
inline constexpr int B1 = 0;
inline constexpr int A1 = 1;
inline constexpr int A3 = 2;
inline constexpr int B3 = 3;
inline constexpr int E1 = 4;
inline constexpr int E2 = 5;
inline constexpr int e1 = 6;
inline constexpr int e2 = 7;
inline constexpr std::array<int, 4> trusted{B1, A1, A3, B3};
inline constexpr std::array<int, 4> eve{E1, E2, e1, e2};
}  // namespace mode

/// (B1, A1, A2, B2) before transmission.
GaussianState initial_cm(double v_a, double v_b);

/// Pure 8-mode state (B1, A1, A3, B3, E1', E2', e1, e2) after both channel
/// passes, built by explicit beam-splitter propagation.
GaussianState propagate_full(const ProtocolParams& protocol, const TwoModeAttack& attack);

/// Same, with a caller-supplied 4-mode attack dilation (E1, E2, e1, e2).
GaussianState propagate_full(const ProtocolParams& protocol, const GaussianState& attack_dilation);

/// Closed-form (B1, A1, A3, B3) covariance matrix for T1 = T2 = T.
GaussianState closed_form_cm(const ProtocolParams& protocol, const TwoModeAttack& attack);

struct MutualInformation {
    double i_ab = 0.0;
    std::array<double, 2> conditional_variances{};
    std::array<double, 2> alice_variances{};
};

MutualInformation mutual_information(const ProtocolParams& protocol, const TwoModeAttack& attack);

struct HolevoResult {
    double chi_be = 0.0;
    std::vector<double> spectrum_unconditioned;
    std::vector<double> spectrum_conditioned;
    /// S(E) from Eve's own marginal; matches the trusted side by purity.
    double eve_entropy = 0.0;
};

HolevoResult holevo_rr(const ProtocolParams& protocol, const TwoModeAttack& attack);
/// Holevo bound with an explicit attack dilation in place of the generic one.
HolevoResult holevo_rr(const ProtocolParams& protocol, const GaussianState& attack_dilation);

/// K = beta I(A:B) - chi(B:E); negative values are returned as-is.
KeyRateReport key_rate(const ProtocolParams& protocol, const TwoModeAttack& attack);
KeyRateReport key_rate(const ProtocolParams& protocol, double c_x, double c_p);

/// One-way coherent states with heterodyne detection at both ends through a
/// thermal-loss channel, reverse reconciliation.
KeyRateReport one_way_key_rate(double v_mod, double transmittance, double excess_noise, double beta);

}  // namespace cvqkd
