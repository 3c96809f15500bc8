#pragma once
// Zero-mean Gaussian states in the covariance-matrix picture.
//
// Quadratures are interleaved (x1, p1, x2, p2, ...) and the vacuum has unit
// variance. Every operation here is a pure function of its arguments.

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cvqkd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kPhysicalTolerance = 1e-9;
inline constexpr double kSymplecticTolerance = 1e-10;
inline constexpr double kPurityTolerance = 1e-8;

/// Covariance matrix of an N-mode zero-mean Gaussian state.
/// The matrix is symmetrised on construction.
class GaussianState {
public:
    explicit GaussianState(Matrix cm);

    int modes() const noexcept { return modes_; }
    const Matrix& cm() const noexcept { return cm_; }

    /// 2x2 block between modes i and j.
    Matrix block(int i, int j) const;

    /// All symplectic eigenvalues >= 1 - kPhysicalTolerance.
    bool physical() const;
    bool pure(double tol = kPurityTolerance) const;

private:
    int modes_;
    Matrix cm_;
};

/// Real 2N x 2N matrix preserving the symplectic form.
class SymplecticMatrix {
public:
    /// Throws InvalidArgument when S Omega S^T deviates from Omega by more
    /// than `tol` in any entry.
    explicit SymplecticMatrix(Matrix s, double tol = kSymplecticTolerance);

    static SymplecticMatrix identity(int modes);

    int modes() const noexcept { return modes_; }
    const Matrix& matrix() const noexcept { return s_; }

    /// Composition: (a * b) applies b first.
    friend SymplecticMatrix operator*(const SymplecticMatrix& a, const SymplecticMatrix& b);
    SymplecticMatrix transpose() const;

private:
    struct Unchecked {};
    SymplecticMatrix(Matrix s, Unchecked);

    int modes_;
    Matrix s_;
};

/// Max-norm distance of S Omega S^T from Omega.
double symplectic_residual(const Matrix& s);

Matrix symplectic_form(int modes);

GaussianState vacuum(int modes = 1);
GaussianState thermal_state(double variance);
/// Two-mode squeezed vacuum with quadrature variance V on both arms and
/// correlations sqrt(V^2 - 1) * diag(1, -1).
GaussianState epr_state(double variance);

enum class BeamSplitterSign {
    /// a -> sqrt(T) a + sqrt(1-T) b,   b -> -sqrt(1-T) a + sqrt(T) b
    Standard,
    /// a -> sqrt(T) a - sqrt(1-T) b,   b ->  sqrt(1-T) a + sqrt(T) b
    Flipped,
};

/// Beam splitter of transmittance T acting on modes a and b of an
/// n-mode system, identity elsewhere.
SymplecticMatrix beam_splitter(int modes, double transmittance, int mode_a, int mode_b,
                               BeamSplitterSign sign = BeamSplitterSign::Standard);

/// Single-mode squeezer diag(e^-r, e^r) on `mode`.
SymplecticMatrix squeezer(int modes, double r, int mode);
/// Phase rotation by theta on `mode`.
SymplecticMatrix phase_rotation(int modes, double theta, int mode);

GaussianState apply_symplectic(const GaussianState& state, const SymplecticMatrix& s);

GaussianState tensor(const GaussianState& a, const GaussianState& b);
/// Marginal on `kept_modes`, in the order given.
GaussianState reduce(const GaussianState& state, std::span<const int> kept_modes);
/// Reorders modes: output mode i is input mode `order[i]`.
GaussianState permute(const GaussianState& state, std::span<const int> order);

/// Symplectic spectrum, descending. Throws NumericalDomainError when the
/// covariance matrix is not positive definite.
std::vector<double> symplectic_eigenvalues(const GaussianState& state);

/// G(x) = (x+1) log2(x+1) - x log2 x, with G(0) = 0.
double g_function(double x);

/// Entropy in bits from a symplectic spectrum. Eigenvalues within
/// kPhysicalTolerance below 1 are clipped to 1; anything lower is rejected.
double entropy_from_spectrum(std::span<const double> spectrum);
double von_neumann_entropy(const GaussianState& state);

struct WilliamsonDecomposition {
    SymplecticMatrix s;
    /// One value per mode; mode k of the normal form carries eigenvalues[k].
    std::vector<double> eigenvalues;
};

/// cm = S (+)_k lambda_k I_2 S^T, eigenvalues descending.
WilliamsonDecomposition williamson_decompose(const GaussianState& state);

/// 2N-mode pure state whose first N modes reproduce `state`.
GaussianState purify(const GaussianState& state);

struct HeterodyneDilation {
    GaussianState state;
    /// Quadrature indices carrying the two commuting outcomes.
    int x_quadrature;
    int p_quadrature;
};

/// Appends a vacuum mode and mixes it with `mode` on a balanced beam
/// splitter. The outcome x sits on `mode`, the outcome p on the appended
/// mode; each has variance (V + 1) / 2 for an uncorrelated input of
/// variance V.
HeterodyneDilation heterodyne_dilate(const GaussianState& state, int mode);

/// A classical outcome: sum of coefficient * quadrature plus independent
/// Gaussian noise of the given variance.
struct LinearOutcome {
    std::vector<std::pair<int, double>> terms;
    double added_noise = 0.0;
};

struct ConditionOptions {
    /// Adds relative * max|Gamma| to Gamma's diagonal before inversion.
    double relative_regularization = 0.0;
};

struct ConditionedState {
    GaussianState state;
    /// Covariance of the outcome variables.
    Matrix outcome_covariance;
    /// Covariance between kept quadratures (rows) and outcomes (columns).
    Matrix cross_covariance;
};

/// Gaussian conditioning of `kept_modes` on the classical outcomes.
/// Every quadrature in the outcome forms must commute with every other and
/// must not belong to a kept mode.
ConditionedState condition_on_linear_outcomes(const GaussianState& state,
                                              std::span<const LinearOutcome> outcomes,
                                              std::span<const int> kept_modes,
                                              const ConditionOptions& options = {});

enum class Quadrature { X, P };

/// Homodyne conditioning via the Moore-Penrose rule
/// gamma_A - sigma (Pi gamma_B Pi)^+ sigma^T.
GaussianState condition_homodyne(const GaussianState& state, int mode, Quadrature quadrature,
                                 std::span<const int> kept_modes);

}  // namespace cvqkd
