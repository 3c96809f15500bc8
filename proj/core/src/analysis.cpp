#include "cvqkd/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "cvqkd/errors.hpp"

namespace cvqkd {
namespace {

// Runs body(i) for i in [0, n). Each index writes only its own output slot,
// so results do not depend on the worker count.
template <typename Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
    const auto threads = static_cast<std::size_t>(std::max(1, workers));
    if (threads == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(threads, n); ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n == 1) {
        out[0] = 0.5 * (lo + hi);
        return out;
    }
    const double step = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + i * step;
    // Exact symmetry about zero for symmetric ranges keeps (0, 0) and the
    // diagonal on the grid.
    if (lo == -hi) {
        for (int i = 0; i < n / 2; ++i) out[static_cast<std::size_t>(n - 1 - i)] = -out[static_cast<std::size_t>(i)];
        if (n % 2 == 1) out[static_cast<std::size_t>(n / 2)] = 0.0;
    }
    return out;
}

struct NodeValue {
    AttackClass attack_class = AttackClass::Unphysical;
    std::optional<double> rate;
};

NodeValue evaluate(const ProtocolParams& p, double c_x, double c_p) {
    const auto attack = symmetric_attack(p, c_x, c_p);
    NodeValue v;
    v.attack_class = classify(attack);
    if (v.attack_class != AttackClass::Unphysical) v.rate = key_rate(p, attack).key_rate;
    return v;
}

}  // namespace

double distance_to_transmittance(const ChannelMapping& m) {
    if (!(m.attenuation_db_per_km > 0.0)) throw InvalidArgument("attenuation must be > 0 dB/km");
    if (!(m.distance_km >= 0.0)) throw InvalidArgument("distance must be >= 0 km");
    return std::pow(10.0, -m.attenuation_db_per_km * m.distance_km / 10.0);
}

double physical_correlation_bound(const ProtocolParams& p) {
    const double v = p.ancilla_variance();
    return max_correlation_on_ray(v, v, 1.0, -1.0, RayCriterion::Physical);
}

SweepResult sweep_plane(const ProtocolParams& protocol, const SweepOptions& options) {
    protocol.validate();
    if (options.resolution < 3 || options.resolution % 2 == 0)
        throw InvalidArgument("sweep_plane: resolution must be odd and >= 3");
    const double h = options.half_width.value_or(physical_correlation_bound(protocol));
    if (!(h >= 0.0)) throw InvalidArgument("sweep_plane: half width must be >= 0");

    SweepResult r;
    r.axis = h < 1e-12 ? std::vector<double>{0.0} : linspace(-h, h, options.resolution);
    const std::size_t n = r.axis.size();
    std::vector<NodeValue> nodes(n * n);
    parallel_for(n * n, options.workers, [&](std::size_t k) {
        nodes[k] = evaluate(protocol, r.axis[k / n], r.axis[k % n]);
    });

    r.rates.assign(n, std::vector<std::optional<double>>(n));
    r.classes.assign(n, std::vector<AttackClass>(n, AttackClass::Unphysical));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto& v = nodes[i * n + j];
            r.rates[i][j] = v.rate;
            r.classes[i][j] = v.attack_class;
            if (v.rate && *v.rate < best) {
                best = *v.rate;
                r.argmin_c_x = r.axis[i];
                r.argmin_c_p = r.axis[j];
            }
        }
    }
    r.min_rate = best;
    return r;
}

std::vector<LinePoint> sweep_line(const ProtocolParams& protocol, double slope, int points, int workers) {
    protocol.validate();
    if (points < 1) throw InvalidArgument("sweep_line: points must be >= 1");
    const double v = protocol.ancilla_variance();
    const double ext = max_correlation_on_ray(v, v, 1.0, slope, RayCriterion::Physical);
    const auto cs = ext < 1e-12 ? std::vector<double>{0.0} : linspace(-ext, ext, points);
    std::vector<LinePoint> out(cs.size());
    parallel_for(cs.size(), workers, [&](std::size_t i) {
        const double cx = cs[i];
        const double cp = slope * cs[i];
        const auto node = evaluate(protocol, cx, cp);
        out[i] = {cx, cp, node.attack_class, node.rate};
    });
    return out;
}

OptimalAttack find_optimal_attack(const ProtocolParams& protocol, const SearchOptions& options) {
    protocol.validate();
    if (options.refinement_levels < 1) throw InvalidArgument("find_optimal_attack: levels must be >= 1");
    if (options.nodes_per_axis < 3) throw InvalidArgument("find_optimal_attack: need >= 3 nodes per axis");
    const bool diagonal = options.mode == SearchMode::Diagonal;
    const double v = protocol.ancilla_variance();
    const double h = diagonal ? max_correlation_on_ray(v, v, 1.0, 1.0, RayCriterion::Physical)
                              : physical_correlation_bound(protocol);

    OptimalAttack best;
    best.key_rate = std::numeric_limits<double>::infinity();
    if (h < 1e-12) {
        const auto node = evaluate(protocol, 0.0, 0.0);
        if (!node.rate) throw EmptyDomain("find_optimal_attack: no physical attack");
        return {0.0, 0.0, *node.rate, node.attack_class, 0};
    }

    const int n = options.nodes_per_axis;
    double x_lo = -h, x_hi = h, p_lo = -h, p_hi = h;
    for (int level = 0; level < options.refinement_levels; ++level) {
        const double cell_x = (x_hi - x_lo) / (n - 1);
        const double cell_p = (p_hi - p_lo) / (n - 1);
        const double shift = level == 0 ? options.grid_offset : 0.0;
        auto xs = linspace(x_lo + shift * cell_x, x_hi + shift * cell_x, n);
        auto ps = linspace(p_lo + shift * cell_p, p_hi + shift * cell_p, n);

        const std::size_t count = diagonal ? xs.size() : xs.size() * ps.size();
        std::vector<NodeValue> nodes(count);
        parallel_for(count, options.workers, [&](std::size_t k) {
            const double cx = diagonal ? xs[k] : xs[k / ps.size()];
            const double cp = diagonal ? xs[k] : ps[k % ps.size()];
            nodes[k] = evaluate(protocol, cx, cp);
        });

        std::optional<std::size_t> arg;
        for (std::size_t k = 0; k < count; ++k)
            if (nodes[k].rate && (!arg || *nodes[k].rate < *nodes[*arg].rate)) arg = k;
        if (!arg) {
            if (level == 0) throw EmptyDomain("find_optimal_attack: no physical node in the search region");
            break;
        }
        const double cx = diagonal ? xs[*arg] : xs[*arg / ps.size()];
        const double cp = diagonal ? xs[*arg] : ps[*arg % ps.size()];
        if (*nodes[*arg].rate < best.key_rate) {
            best = {cx, cp, *nodes[*arg].rate, nodes[*arg].attack_class, level + 1};
        }
        x_lo = cx - 1.5 * cell_x;
        x_hi = cx + 1.5 * cell_x;
        p_lo = cp - 1.5 * cell_p;
        p_hi = cp + 1.5 * cell_p;
        best.levels_used = level + 1;
        if (std::max(x_hi - x_lo, diagonal ? 0.0 : p_hi - p_lo) < options.bracket_tolerance) break;
    }
    return best;
}

double normalized_correlation(double c_star, double v_e) {
    if (!(v_e > 1.0)) throw InvalidArgument("normalized_correlation: v_e must be > 1");
    return c_star / max_correlation_on_ray(v_e, v_e, 1.0, 1.0, RayCriterion::Separable);
}

double frontier_objective(const ProtocolParams& protocol, double epsilon, FrontierSide side,
                          const SearchOptions& search) {
    ProtocolParams p = protocol;
    p.excess_noise = epsilon;
    if (side == FrontierSide::OneWay)
        return one_way_key_rate(p.v_a, p.transmittance, epsilon, p.beta).key_rate;
    return find_optimal_attack(p, search).key_rate;
}

FrontierBracket frontier_bracket(const ProtocolParams& protocol, FrontierSide side, const FrontierOptions& o) {
    if (!(o.tolerance > 0.0) || !(o.epsilon_hi > 0.0) || o.epsilon_cap < o.epsilon_hi)
        throw InvalidArgument("frontier: invalid bracket options");
    auto k = [&](double eps) { return frontier_objective(protocol, eps, side, o.search); };

    FrontierBracket b;
    b.rate_low = k(0.0);
    if (b.rate_low <= 0.0) {
        b.never_positive = true;
        b.rate_high = b.rate_low;
        return b;
    }
    double lo = 0.0;
    double hi = o.epsilon_hi;
    double k_hi = k(hi);
    while (k_hi > 0.0 && hi < o.epsilon_cap) {
        lo = hi;
        b.rate_low = k_hi;
        hi = std::min(2.0 * hi, o.epsilon_cap);
        k_hi = k(hi);
    }
    if (k_hi > 0.0) {
        b.unbounded = true;
        b.epsilon_low = b.epsilon_high = hi;
        b.rate_low = b.rate_high = k_hi;
        return b;
    }
    b.rate_high = k_hi;
    while (hi - lo > o.tolerance) {
        const double mid = 0.5 * (lo + hi);
        const double km = k(mid);
        if (km > 0.0) {
            lo = mid;
            b.rate_low = km;
        } else {
            hi = mid;
            b.rate_high = km;
        }
    }
    b.epsilon_low = lo;
    b.epsilon_high = hi;
    return b;
}

std::vector<FrontierPoint> noise_frontier(std::span<const double> distances_km, const ProtocolParams& protocol,
                                          double attenuation_db_per_km, const FrontierOptions& options,
                                          int workers) {
    for (std::size_t i = 0; i < distances_km.size(); ++i) {
        if (!(distances_km[i] > 0.0)) throw InvalidArgument("noise_frontier: distances must be positive");
        if (i > 0 && !(distances_km[i] > distances_km[i - 1]))
            throw InvalidArgument("noise_frontier: distances must be ascending");
    }
    // Nested searches stay serial; the parallelism is across distances.
    FrontierOptions inner = options;
    inner.search.workers = 1;
    std::vector<FrontierPoint> out(distances_km.size());
    parallel_for(distances_km.size(), workers, [&](std::size_t i) {
        ProtocolParams p = protocol;
        p.transmittance = distance_to_transmittance({attenuation_db_per_km, distances_km[i]});
        out[i].distance_km = distances_km[i];
        out[i].two_way = frontier_bracket(p, FrontierSide::TwoWayOptimalAttack, inner);
        out[i].one_way = frontier_bracket(p, FrontierSide::OneWay, inner);
    });
    return out;
}

}  // namespace cvqkd
