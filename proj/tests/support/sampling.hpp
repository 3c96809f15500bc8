#pragma once
// Random physical inputs shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <random>

#include "cvqkd/analysis.hpp"
#include "cvqkd/attack.hpp"
#include "cvqkd/gaussian.hpp"
#include "cvqkd/protocol.hpp"

namespace cvqkd::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Product of random beam splitters, squeezers and rotations.
inline SymplecticMatrix random_symplectic(std::mt19937_64& rng, int modes, int layers = 6) {
    auto s = SymplecticMatrix::identity(modes);
    for (int l = 0; l < layers; ++l) {
        for (int m = 0; m < modes; ++m) {
            s = phase_rotation(modes, uniform(rng, 0.0, 6.283), m) * s;
            s = squeezer(modes, uniform(rng, -0.8, 0.8), m) * s;
        }
        if (modes > 1) {
            const int a = static_cast<int>(rng() % static_cast<unsigned>(modes));
            const int b = (a + 1 + static_cast<int>(rng() % static_cast<unsigned>(modes - 1))) % modes;
            s = beam_splitter(modes, uniform(rng, 0.0, 1.0), a, b) * s;
        }
    }
    return s;
}

/// Mixed state: thermal product pushed through a random symplectic.
inline GaussianState random_state(std::mt19937_64& rng, int modes) {
    Matrix d = Matrix::Zero(2 * modes, 2 * modes);
    for (int m = 0; m < modes; ++m) d(2 * m, 2 * m) = d(2 * m + 1, 2 * m + 1) = uniform(rng, 1.0, 6.0);
    return apply_symplectic(GaussianState(d), random_symplectic(rng, modes));
}

struct Sample {
    ProtocolParams params;
    TwoModeAttack attack;
};

/// Valid protocol parameters with a physical attack drawn uniformly from
/// the physical part of the correlation box.
inline Sample random_sample(std::mt19937_64& rng) {
    Sample s;
    auto& p = s.params;
    p.v_a = uniform(rng, 1.5, 40.0);
    p.v_b = uniform(rng, 1.5, 40.0);
    p.eta = uniform(rng, 0.05, 0.95);
    p.beta = uniform(rng, 0.9, 1.0);
    p.transmittance = uniform(rng, 0.05, 0.95);
    p.excess_noise = uniform(rng, 0.0, 1.0);
    const double h = physical_correlation_bound(p);
    for (;;) {
        s.attack = symmetric_attack(p, uniform(rng, -h, h), uniform(rng, -h, h));
        if (s.attack.physical()) return s;
    }
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace cvqkd::testing
