#pragma once
// Correlation-plane sweeps, worst-case attack search and tolerable-noise
// frontiers built on the key-rate engine.

#include <optional>
#include <vector>

#include "cvqkd/attack.hpp"
#include "cvqkd/protocol.hpp"

namespace cvqkd {

struct ChannelMapping {
    double attenuation_db_per_km = 0.2;
    double distance_km = 0.0;
};

/// T = 10^(-alpha d / 10).
double distance_to_transmittance(const ChannelMapping& mapping);

/// Largest |c| on the anti-diagonal c_x = -c_p for the symmetric ancilla
/// variance of `protocol`; it bounds the physical correlation plane.
double physical_correlation_bound(const ProtocolParams& protocol);

struct SweepOptions {
    /// Nodes per axis; odd and >= 3 so (0, 0) is a node.
    int resolution = 41;
    /// Half-width of the square grid; defaults to physical_correlation_bound.
    std::optional<double> half_width;
    int workers = 1;
};

struct SweepResult {
    std::vector<double> axis;
    /// rates[i][j] is K at (c_x = axis[i], c_p = axis[j]); empty for
    /// unphysical nodes.
    std::vector<std::vector<std::optional<double>>> rates;
    std::vector<std::vector<AttackClass>> classes;
    double argmin_c_x = 0.0;
    double argmin_c_p = 0.0;
    double min_rate = 0.0;
};

SweepResult sweep_plane(const ProtocolParams& protocol, const SweepOptions& options = {});

struct LinePoint {
    double c_x;
    double c_p;
    AttackClass attack_class;
    std::optional<double> key_rate;
};

/// K along c_p = slope * c_x (slope +1 or -1) over the physical extent of
/// that line, `points` samples.
std::vector<LinePoint> sweep_line(const ProtocolParams& protocol, double slope, int points, int workers = 1);

enum class SearchMode { FullPlane, Diagonal };

struct SearchOptions {
    SearchMode mode = SearchMode::FullPlane;
    /// Upper bound on refinement passes; the search stops earlier once the
    /// bracket is narrower than `bracket_tolerance`.
    int refinement_levels = 12;
    int nodes_per_axis = 21;
    double bracket_tolerance = 1e-5;
    /// Shifts the first grid by this fraction of a cell, for robustness checks.
    double grid_offset = 0.0;
    int workers = 1;
};

struct OptimalAttack {
    double c_x = 0.0;
    double c_p = 0.0;
    double key_rate = 0.0;
    AttackClass attack_class = AttackClass::SeparableIndependent;
    int levels_used = 0;
};

/// Rate-minimising (c_x, c_p) over the physical plane by successive grid
/// refinement. Throws EmptyDomain when no searched node is physical.
OptimalAttack find_optimal_attack(const ProtocolParams& protocol, const SearchOptions& options = {});

/// c / C_sep^max where C_sep^max is the separable bound on the diagonal.
double normalized_correlation(double c_star, double v_e);

enum class FrontierSide { TwoWayOptimalAttack, OneWay };

struct FrontierOptions {
    double epsilon_hi = 2.0;
    double epsilon_cap = 16.0;
    double tolerance = 1e-4;
    SearchOptions search{};
};

/// Bisection certificate for the largest tolerable excess noise.
struct FrontierBracket {
    /// K > 0 here (or 0 with never_positive set).
    double epsilon_low = 0.0;
    /// K <= 0 here.
    double epsilon_high = 0.0;
    double rate_low = 0.0;
    double rate_high = 0.0;
    /// K <= 0 even as eps -> 0.
    bool never_positive = false;
    /// K still > 0 at the cap.
    bool unbounded = false;
    double value() const { return epsilon_low; }
};

struct FrontierPoint {
    double distance_km = 0.0;
    FrontierBracket two_way;
    FrontierBracket one_way;
};

/// Worst-case key rate at a given excess noise for one side of the
/// comparison. `protocol.excess_noise` is ignored.
double frontier_objective(const ProtocolParams& protocol, double epsilon, FrontierSide side,
                          const SearchOptions& search);

FrontierBracket frontier_bracket(const ProtocolParams& protocol, FrontierSide side,
                                 const FrontierOptions& options = {});

/// Per distance (ascending, positive), both sides. `protocol.transmittance`
/// is replaced by the mapped value at each distance.
std::vector<FrontierPoint> noise_frontier(std::span<const double> distances_km, const ProtocolParams& protocol,
                                          double attenuation_db_per_km, const FrontierOptions& options = {},
                                          int workers = 1);

}  // namespace cvqkd
