#include "cvqkd/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "cvqkd/errors.hpp"

namespace cvqkd {
namespace {

std::vector<int> quadratures_of(std::span<const int> modes) {
    std::vector<int> q;
    q.reserve(modes.size() * 2);
    for (int m : modes) {
        q.push_back(2 * m);
        q.push_back(2 * m + 1);
    }
    return q;
}

Matrix submatrix(const Matrix& m, std::span<const int> rows, std::span<const int> cols) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
    return out;
}

void check_modes(int n, std::span<const int> modes, const char* what) {
    std::set<int> seen;
    for (int m : modes) {
        if (m < 0 || m >= n)
            throw InvalidArgument(std::string(what) + ": mode index " + std::to_string(m) +
                                  " out of range for " + std::to_string(n) + " modes");
        if (!seen.insert(m).second)
            throw InvalidArgument(std::string(what) + ": repeated mode index " + std::to_string(m));
    }
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

struct SqrtResult {
    Matrix root;
    Matrix inverse_root;
};

// Symmetric square root of a positive-definite matrix.
SqrtResult spd_sqrt(const Matrix& cm) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cm);
    if (eig.info() != Eigen::Success)
        throw NumericalDomainError("eigen-decomposition of covariance matrix failed");
    const Vector& d = eig.eigenvalues();
    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    if (d.minCoeff() <= 1e-14 * scale)
        throw NumericalDomainError("covariance matrix is not positive definite (min eigenvalue " +
                                   std::to_string(d.minCoeff()) + ")");
    const Matrix& q = eig.eigenvectors();
    return {q * d.cwiseSqrt().asDiagonal() * q.transpose(),
            q * d.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose()};
}

}  // namespace

// ---------------------------------------------------------------- states

GaussianState::GaussianState(Matrix cm) : modes_(0), cm_(std::move(cm)) {
    if (cm_.rows() != cm_.cols() || cm_.rows() == 0 || cm_.rows() % 2 != 0)
        throw InvalidArgument("covariance matrix must be square with even, non-zero dimension");
    if (!cm_.allFinite()) throw InvalidArgument("covariance matrix has non-finite entries");
    modes_ = static_cast<int>(cm_.rows() / 2);
    cm_ = symmetrized(cm_);
}

Matrix GaussianState::block(int i, int j) const {
    if (i < 0 || j < 0 || i >= modes_ || j >= modes_) throw InvalidArgument("block: mode out of range");
    return cm_.block(2 * i, 2 * j, 2, 2);
}

bool GaussianState::physical() const {
    try {
        const auto spectrum = symplectic_eigenvalues(*this);
        return spectrum.back() >= 1.0 - kPhysicalTolerance;
    } catch (const NumericalDomainError&) {
        return false;
    }
}

bool GaussianState::pure(double tol) const {
    const auto spectrum = symplectic_eigenvalues(*this);
    return std::all_of(spectrum.begin(), spectrum.end(),
                       [tol](double l) { return std::abs(l - 1.0) <= tol; });
}

// ----------------------------------------------------- symplectic matrices

double symplectic_residual(const Matrix& s) {
    if (s.rows() != s.cols() || s.rows() % 2 != 0) return std::numeric_limits<double>::infinity();
    const Matrix omega = symplectic_form(static_cast<int>(s.rows() / 2));
    return (s * omega * s.transpose() - omega).cwiseAbs().maxCoeff();
}

SymplecticMatrix::SymplecticMatrix(Matrix s, double tol) : modes_(0), s_(std::move(s)) {
    if (s_.rows() != s_.cols() || s_.rows() == 0 || s_.rows() % 2 != 0)
        throw InvalidArgument("symplectic matrix must be square with even, non-zero dimension");
    modes_ = static_cast<int>(s_.rows() / 2);
    const double r = symplectic_residual(s_);
    if (!(r <= tol))
        throw InvalidArgument("matrix is not symplectic (residual " + std::to_string(r) + ")");
}

SymplecticMatrix::SymplecticMatrix(Matrix s, Unchecked) : modes_(static_cast<int>(s.rows() / 2)), s_(std::move(s)) {}

SymplecticMatrix SymplecticMatrix::identity(int modes) {
    if (modes < 1) throw InvalidArgument("identity: modes must be >= 1");
    return {Matrix::Identity(2 * modes, 2 * modes), Unchecked{}};
}

SymplecticMatrix operator*(const SymplecticMatrix& a, const SymplecticMatrix& b) {
    if (a.modes_ != b.modes_) throw InvalidArgument("symplectic product: dimension mismatch");
    return {a.s_ * b.s_, SymplecticMatrix::Unchecked{}};
}

SymplecticMatrix SymplecticMatrix::transpose() const { return {s_.transpose(), Unchecked{}}; }

Matrix symplectic_form(int modes) {
    if (modes < 1) throw InvalidArgument("symplectic_form: modes must be >= 1");
    Matrix omega = Matrix::Zero(2 * modes, 2 * modes);
    for (int k = 0; k < modes; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

// ------------------------------------------------------------ constructors

GaussianState vacuum(int modes) {
    if (modes < 1) throw InvalidArgument("vacuum: modes must be >= 1");
    return GaussianState(Matrix::Identity(2 * modes, 2 * modes));
}

GaussianState thermal_state(double variance) {
    if (!(variance >= 1.0)) throw InvalidArgument("thermal_state: variance must be >= 1");
    return GaussianState(variance * Matrix::Identity(2, 2));
}

GaussianState epr_state(double variance) {
    if (!(variance >= 1.0)) throw InvalidArgument("epr_state: variance must be >= 1");
    const double c = std::sqrt(variance * variance - 1.0);
    Matrix cm = variance * Matrix::Identity(4, 4);
    cm(0, 2) = cm(2, 0) = c;
    cm(1, 3) = cm(3, 1) = -c;
    return GaussianState(std::move(cm));
}

SymplecticMatrix beam_splitter(int modes, double transmittance, int mode_a, int mode_b,
                               BeamSplitterSign sign) {
    if (!(transmittance >= 0.0 && transmittance <= 1.0))
        throw InvalidArgument("beam_splitter: transmittance must lie in [0, 1]");
    if (mode_a == mode_b) throw InvalidArgument("beam_splitter: modes must be distinct");
    const int pair[] = {mode_a, mode_b};
    check_modes(modes, pair, "beam_splitter");

    const double t = std::sqrt(transmittance);
    const double r = std::sqrt(1.0 - transmittance);
    const double s = sign == BeamSplitterSign::Standard ? 1.0 : -1.0;
    Matrix m = Matrix::Identity(2 * modes, 2 * modes);
    for (int q = 0; q < 2; ++q) {
        const int a = 2 * mode_a + q;
        const int b = 2 * mode_b + q;
        m(a, a) = t;
        m(a, b) = s * r;
        m(b, a) = -s * r;
        m(b, b) = t;
    }
    return SymplecticMatrix(std::move(m));
}

SymplecticMatrix squeezer(int modes, double r, int mode) {
    const int one[] = {mode};
    check_modes(modes, one, "squeezer");
    Matrix m = Matrix::Identity(2 * modes, 2 * modes);
    m(2 * mode, 2 * mode) = std::exp(-r);
    m(2 * mode + 1, 2 * mode + 1) = std::exp(r);
    return SymplecticMatrix(std::move(m));
}

SymplecticMatrix phase_rotation(int modes, double theta, int mode) {
    const int one[] = {mode};
    check_modes(modes, one, "phase_rotation");
    Matrix m = Matrix::Identity(2 * modes, 2 * modes);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    m(2 * mode, 2 * mode) = c;
    m(2 * mode, 2 * mode + 1) = s;
    m(2 * mode + 1, 2 * mode) = -s;
    m(2 * mode + 1, 2 * mode + 1) = c;
    return SymplecticMatrix(std::move(m));
}

// --------------------------------------------------------- transformations

GaussianState apply_symplectic(const GaussianState& state, const SymplecticMatrix& s) {
    if (s.modes() != state.modes()) throw InvalidArgument("apply_symplectic: dimension mismatch");
    return GaussianState(s.matrix() * state.cm() * s.matrix().transpose());
}

GaussianState tensor(const GaussianState& a, const GaussianState& b) {
    const auto na = a.cm().rows();
    const auto nb = b.cm().rows();
    Matrix cm = Matrix::Zero(na + nb, na + nb);
    cm.topLeftCorner(na, na) = a.cm();
    cm.bottomRightCorner(nb, nb) = b.cm();
    return GaussianState(std::move(cm));
}

GaussianState reduce(const GaussianState& state, std::span<const int> kept_modes) {
    if (kept_modes.empty()) throw InvalidArgument("reduce: no modes kept");
    check_modes(state.modes(), kept_modes, "reduce");
    const auto q = quadratures_of(kept_modes);
    return GaussianState(submatrix(state.cm(), q, q));
}

GaussianState permute(const GaussianState& state, std::span<const int> order) {
    if (static_cast<int>(order.size()) != state.modes())
        throw InvalidArgument("permute: order must list every mode exactly once");
    check_modes(state.modes(), order, "permute");
    const auto q = quadratures_of(order);
    return GaussianState(submatrix(state.cm(), q, q));
}

// ------------------------------------------------------------------ spectra

std::vector<double> symplectic_eigenvalues(const GaussianState& state) {
    const auto root = spd_sqrt(state.cm()).root;
    const Matrix omega = symplectic_form(state.modes());
    // Similar to -(Omega gamma)^2; every value appears twice.
    const Matrix m = symmetrized(root * omega.transpose() * state.cm() * omega * root);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalDomainError("symplectic spectrum: eigensolver failed");
    const Vector& d = eig.eigenvalues();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(state.modes()));
    for (int k = 0; k < state.modes(); ++k) {
        const double pair = 0.5 * (d(2 * k) + d(2 * k + 1));
        out.push_back(std::sqrt(std::max(pair, 0.0)));
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

double g_function(double x) {
    if (!(x >= 0.0)) throw InvalidArgument("g_function: argument must be >= 0");
    if (x == 0.0) return 0.0;
    return (x + 1.0) * std::log2(x + 1.0) - x * std::log2(x);
}

double entropy_from_spectrum(std::span<const double> spectrum) {
    double s = 0.0;
    for (double l : spectrum) {
        if (l < 1.0 - kPhysicalTolerance)
            throw InvalidArgument("entropy: symplectic eigenvalue " + std::to_string(l) +
                                  " below 1 (unphysical state)");
        s += g_function((std::max(l, 1.0) - 1.0) / 2.0);
    }
    return s;
}

double von_neumann_entropy(const GaussianState& state) {
    const auto spectrum = symplectic_eigenvalues(state);
    return entropy_from_spectrum(spectrum);
}

WilliamsonDecomposition williamson_decompose(const GaussianState& state) {
    const int n = state.modes();
    const auto roots = spd_sqrt(state.cm());
    const Matrix omega = symplectic_form(n);
    const Matrix k = roots.root * omega * roots.root;  // antisymmetric
    const Matrix m = symmetrized(k.transpose() * k);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    if (eig.info() != Eigen::Success) throw NumericalDomainError("williamson: eigensolver failed");

    // Each accepted eigenvector u yields the K-invariant pair (K u / nu, u);
    // candidates are taken greedily by residual after projecting out the
    // pairs already chosen, which keeps degenerate subspaces well conditioned.
    struct Pair {
        double nu;
        Vector a;
        Vector b;
    };
    std::vector<Pair> pairs;
    Matrix basis(2 * n, 0);
    std::vector<bool> used(static_cast<std::size_t>(2 * n), false);
    for (int step = 0; step < n; ++step) {
        int best = -1;
        double best_norm = -1.0;
        Vector best_vec;
        for (int j = 0; j < 2 * n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            Vector w = eig.eigenvectors().col(j);
            if (basis.cols() > 0) w -= basis * (basis.transpose() * w);
            const double norm = w.norm();
            if (norm > best_norm) {
                best_norm = norm;
                best = j;
                best_vec = std::move(w);
            }
        }
        used[static_cast<std::size_t>(best)] = true;
        Vector u = best_vec / best_norm;
        Vector ku = k * u;
        if (basis.cols() > 0) ku -= basis * (basis.transpose() * ku);
        ku -= u * u.dot(ku);
        const double nu = ku.norm();
        if (!(nu > 0.0)) throw NumericalDomainError("williamson: degenerate normal form");
        Vector a = ku / nu;
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 2);
        basis.col(basis.cols() - 2) = a;
        basis.col(basis.cols() - 1) = u;
        pairs.push_back({nu, std::move(a), std::move(u)});
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.nu > y.nu; });

    Matrix o(2 * n, 2 * n);
    Vector scale(2 * n);
    std::vector<double> nus;
    for (int i = 0; i < n; ++i) {
        const auto& p = pairs[static_cast<std::size_t>(i)];
        o.col(2 * i) = p.a;
        o.col(2 * i + 1) = p.b;
        scale(2 * i) = scale(2 * i + 1) = 1.0 / std::sqrt(p.nu);
        nus.push_back(p.nu);
    }
    Matrix s = roots.root * o * scale.asDiagonal();
    const double tol = kSymplecticTolerance * std::max(1.0, s.cwiseAbs().maxCoeff() * s.cwiseAbs().maxCoeff());
    return {SymplecticMatrix(std::move(s), tol), std::move(nus)};
}

GaussianState purify(const GaussianState& state) {
    const int n = state.modes();
    auto w = williamson_decompose(state);
    if (w.eigenvalues.back() < 1.0 - kPhysicalTolerance)
        throw InvalidArgument("purify: state is unphysical (symplectic eigenvalue " +
                              std::to_string(w.eigenvalues.back()) + ")");
    Matrix normal = Matrix::Zero(4 * n, 4 * n);
    for (int k = 0; k < n; ++k) {
        const double nu = std::max(w.eigenvalues[static_cast<std::size_t>(k)], 1.0);
        const double c = std::sqrt(nu * nu - 1.0);
        const int a = 2 * k;
        const int b = 2 * (n + k);
        normal(a, a) = normal(a + 1, a + 1) = nu;
        normal(b, b) = normal(b + 1, b + 1) = nu;
        normal(a, b) = normal(b, a) = c;
        normal(a + 1, b + 1) = normal(b + 1, a + 1) = -c;
    }
    Matrix big = Matrix::Identity(4 * n, 4 * n);
    big.topLeftCorner(2 * n, 2 * n) = w.s.matrix();
    return GaussianState(big * normal * big.transpose());
}

// -------------------------------------------------------------- measurement

HeterodyneDilation heterodyne_dilate(const GaussianState& state, int mode) {
    const int one[] = {mode};
    check_modes(state.modes(), one, "heterodyne_dilate");
    const int n = state.modes();
    auto dilated = apply_symplectic(tensor(state, vacuum(1)), beam_splitter(n + 1, 0.5, mode, n));
    return {std::move(dilated), 2 * mode, 2 * n + 1};
}

ConditionedState condition_on_linear_outcomes(const GaussianState& state,
                                              std::span<const LinearOutcome> outcomes,
                                              std::span<const int> kept_modes,
                                              const ConditionOptions& options) {
    if (outcomes.empty()) throw InvalidArgument("condition: no outcomes given");
    if (kept_modes.empty()) throw InvalidArgument("condition: no modes kept");
    check_modes(state.modes(), kept_modes, "condition");
    const int dim = 2 * state.modes();

    std::set<int> kept_set(kept_modes.begin(), kept_modes.end());
    std::set<int> measured;
    const auto m = static_cast<Eigen::Index>(outcomes.size());
    Matrix l = Matrix::Zero(m, dim);
    Vector noise = Vector::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& o = outcomes[static_cast<std::size_t>(i)];
        if (o.terms.empty()) throw InvalidArgument("condition: empty outcome form");
        if (!(o.added_noise >= 0.0)) throw InvalidArgument("condition: outcome noise must be >= 0");
        noise(i) = o.added_noise;
        for (const auto& [q, coeff] : o.terms) {
            if (q < 0 || q >= dim) throw InvalidArgument("condition: quadrature index out of range");
            if (kept_set.count(q / 2))
                throw InvalidArgument("condition: measured quadrature " + std::to_string(q) +
                                      " belongs to a kept mode");
            l(i, q) += coeff;
            measured.insert(q);
        }
    }
    for (int q : measured)
        if (q % 2 == 0 && measured.count(q + 1))
            throw InvalidArgument("condition: x and p of mode " + std::to_string(q / 2) +
                                  " do not commute");

    Matrix gamma = symmetrized(l * state.cm() * l.transpose());
    gamma.diagonal() += noise;
    if (options.relative_regularization > 0.0)
        gamma.diagonal().array() += options.relative_regularization * gamma.cwiseAbs().maxCoeff();

    Eigen::SelfAdjointEigenSolver<Matrix> eig(gamma, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (!(eig.eigenvalues().minCoeff() > 1e-14 * top))
        throw DegenerateMeasurement("condition: outcome covariance is singular");

    const auto kept_q = quadratures_of(kept_modes);
    Matrix kept_rows(static_cast<Eigen::Index>(kept_q.size()), dim);
    for (std::size_t i = 0; i < kept_q.size(); ++i) kept_rows.row(static_cast<Eigen::Index>(i)) = state.cm().row(kept_q[i]);
    Matrix sigma = kept_rows * l.transpose();
    Matrix kept_cm(static_cast<Eigen::Index>(kept_q.size()), static_cast<Eigen::Index>(kept_q.size()));
    for (std::size_t j = 0; j < kept_q.size(); ++j) kept_cm.col(static_cast<Eigen::Index>(j)) = kept_rows.col(kept_q[j]);

    const Matrix correction = sigma * gamma.ldlt().solve(sigma.transpose());
    return {GaussianState(kept_cm - correction), std::move(gamma), std::move(sigma)};
}

GaussianState condition_homodyne(const GaussianState& state, int mode, Quadrature quadrature,
                                 std::span<const int> kept_modes) {
    const int one[] = {mode};
    check_modes(state.modes(), one, "condition_homodyne");
    check_modes(state.modes(), kept_modes, "condition_homodyne");
    if (std::find(kept_modes.begin(), kept_modes.end(), mode) != kept_modes.end())
        throw InvalidArgument("condition_homodyne: measured mode is also kept");
    const auto kept_q = quadratures_of(kept_modes);
    const int mq[] = {2 * mode, 2 * mode + 1};
    const Matrix a = submatrix(state.cm(), kept_q, kept_q);
    const Matrix b = submatrix(state.cm(), mq, mq);
    const Matrix c = submatrix(state.cm(), kept_q, mq);
    Matrix pi = Matrix::Zero(2, 2);
    if (quadrature == Quadrature::X) pi(0, 0) = 1.0;
    else pi(1, 1) = 1.0;
    const Matrix pinv = (pi * b * pi).completeOrthogonalDecomposition().pseudoInverse();
    return GaussianState(a - c * pinv * c.transpose());
}

}  // namespace cvqkd
