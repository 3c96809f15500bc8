#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cvqkd/errors.hpp"
#include "cvqkd/gaussian.hpp"
#include "sampling.hpp"

using namespace cvqkd;
using cvqkd::testing::max_abs_diff;

namespace {

// Second spectrum route: the eigenvalues of Omega gamma are +-i nu.
std::vector<double> spectrum_via_omega_gamma(const GaussianState& s) {
    const Matrix og = symplectic_form(s.modes()) * s.cm();
    Eigen::EigenSolver<Matrix> es(og, false);
    std::vector<double> v;
    for (int i = 0; i < og.rows(); ++i) v.push_back(std::abs(es.eigenvalues()[i].imag()));
    std::sort(v.begin(), v.end(), std::greater<>());
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); i += 2) out.push_back(v[i]);
    return out;
}

Matrix reconstruct(const WilliamsonDecomposition& w) {
    const int n = static_cast<int>(w.eigenvalues.size());
    Matrix d = Matrix::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) d(2 * k, 2 * k) = d(2 * k + 1, 2 * k + 1) = w.eigenvalues[k];
    return w.s.matrix() * d * w.s.matrix().transpose();
}

GaussianState attack_cm(double v1, double v2, double cx, double cp) {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = v1;
    m(2, 2) = m(3, 3) = v2;
    m(0, 2) = m(2, 0) = cx;
    m(1, 3) = m(3, 1) = cp;
    return GaussianState(m);
}

}  // namespace

TEST_CASE("symplectic form") {
    Matrix o1(2, 2);
    o1 << 0, 1, -1, 0;
    CHECK(symplectic_form(1) == o1);
    const Matrix o2 = symplectic_form(2);
    CHECK(max_abs_diff(o2 * o2, -Matrix::Identity(4, 4)) == 0.0);
    CHECK(symplectic_form(3).determinant() == doctest::Approx(1.0));
    CHECK_THROWS_AS(symplectic_form(0), InvalidArgument);
}

TEST_CASE("epr state") {
    CHECK(max_abs_diff(epr_state(1.0).cm(), Matrix::Identity(4, 4)) < 1e-15);
    const auto e = epr_state(20.0);
    CHECK(e.cm()(0, 2) == doctest::Approx(std::sqrt(399.0)));
    CHECK(e.cm()(1, 3) == doctest::Approx(-std::sqrt(399.0)));
    CHECK(std::sqrt(399.0) == doctest::Approx(19.97498).epsilon(1e-6));
    const auto nu = symplectic_eigenvalues(epr_state(3.0));
    CHECK(nu[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(nu[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(epr_state(0.5), InvalidArgument);
}

TEST_CASE("beam splitter") {
    CHECK(max_abs_diff(beam_splitter(2, 1.0, 0, 1).matrix(), Matrix::Identity(4, 4)) == 0.0);

    auto s = apply_symplectic(vacuum(2), beam_splitter(2, 0.5, 0, 1));
    s = apply_symplectic(s, beam_splitter(2, 0.5, 0, 1));
    CHECK(max_abs_diff(s.cm(), Matrix::Identity(4, 4)) < 1e-14);

    // EPR arm mixed with vacuum.
    const int order[] = {1, 0};
    const auto arm = reduce(epr_state(7.0), std::span<const int>(order, 1));
    const auto mixed = apply_symplectic(tensor(arm, vacuum()), beam_splitter(2, 0.75, 0, 1));
    CHECK(mixed.cm()(0, 0) == doctest::Approx(0.75 * 7.0 + 0.25));

    const auto t = apply_symplectic(tensor(thermal_state(5.0), thermal_state(2.0)), beam_splitter(2, 0.5, 0, 1));
    CHECK(t.cm()(0, 0) == doctest::Approx(3.5));
    CHECK(t.cm()(2, 2) == doctest::Approx(3.5));
    CHECK(std::abs(t.cm()(0, 2)) == doctest::Approx(1.5));
    CHECK(t.cm()(0, 2) == doctest::Approx(t.cm()(1, 3)));
    CHECK(t.cm()(0, 3) == doctest::Approx(0.0));

    CHECK_THROWS_AS(beam_splitter(2, 1.5, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(beam_splitter(2, 0.5, 1, 1), InvalidArgument);
    CHECK(symplectic_residual(beam_splitter(3, 0.3, 2, 0, BeamSplitterSign::Flipped).matrix()) < 1e-15);
}

TEST_CASE("symplectic matrix rejects non-symplectic input") {
    CHECK_THROWS_AS(SymplecticMatrix(2.0 * Matrix::Identity(2, 2)), InvalidArgument);
    CHECK_THROWS_AS(SymplecticMatrix(Matrix::Identity(3, 3)), InvalidArgument);
}

TEST_CASE("apply symplectic") {
    std::mt19937_64 seed(1);
    const auto s = cvqkd::testing::random_state(seed, 2);
    CHECK(max_abs_diff(apply_symplectic(s, SymplecticMatrix::identity(2)).cm(), s.cm()) == 0.0);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
        const auto pure = apply_symplectic(vacuum(3), cvqkd::testing::random_symplectic(rng, 3));
        CHECK(pure.pure(1e-9));
    }
    CHECK_THROWS_AS(apply_symplectic(vacuum(2), SymplecticMatrix::identity(3)), InvalidArgument);
}

TEST_CASE("tensor, reduce, permute") {
    CHECK(max_abs_diff(tensor(vacuum(), vacuum()).cm(), Matrix::Identity(4, 4)) == 0.0);
    const int first[] = {0};
    CHECK(max_abs_diff(reduce(epr_state(4.0), first).cm(), 4.0 * Matrix::Identity(2, 2)) == 0.0);

    std::mt19937_64 rng(3);
    const auto s = cvqkd::testing::random_state(rng, 4);
    const int order[] = {2, 0, 3, 1};
    const int inverse[] = {1, 3, 0, 2};
    CHECK(max_abs_diff(permute(permute(s, order), inverse).cm(), s.cm()) == 0.0);
    CHECK(max_abs_diff(permute(s, order).block(0, 1), s.block(2, 0)) == 0.0);

    const int bad[] = {0, 0, 1, 2};
    CHECK_THROWS_AS(permute(s, bad), InvalidArgument);
    const int out_of_range[] = {5};
    CHECK_THROWS_AS(reduce(s, out_of_range), InvalidArgument);
}

TEST_CASE("symplectic eigenvalues") {
    CHECK(symplectic_eigenvalues(vacuum())[0] == doctest::Approx(1.0));
    CHECK(symplectic_eigenvalues(thermal_state(3.0))[0] == doctest::Approx(3.0));
    const auto nu = symplectic_eigenvalues(attack_cm(3, 3, 2, 2));
    REQUIRE(nu.size() == 2);
    CHECK(nu[0] == doctest::Approx(5.0));
    CHECK(nu[1] == doctest::Approx(1.0));

    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 0) = -1.0;
    CHECK_THROWS_AS(symplectic_eigenvalues(GaussianState(bad)), NumericalDomainError);
}

TEST_CASE("property: spectrum is symplectic invariant and matches a second route") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 4;
        const auto s = cvqkd::testing::random_state(rng, n);
        const auto a = symplectic_eigenvalues(s);
        const auto b = symplectic_eigenvalues(apply_symplectic(s, cvqkd::testing::random_symplectic(rng, n)));
        const auto c = spectrum_via_omega_gamma(s);
        for (int k = 0; k < n; ++k) {
            CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-8));
            CHECK(a[k] == doctest::Approx(c[k]).epsilon(1e-8));
        }
    }
}

TEST_CASE("entropy") {
    CHECK(g_function(0.0) == 0.0);
    CHECK(g_function(1.0) == doctest::Approx(2.0));
    CHECK(g_function(0.5) == doctest::Approx(1.377444).epsilon(1e-6));
    CHECK(von_neumann_entropy(vacuum()) == doctest::Approx(0.0));
    CHECK(von_neumann_entropy(thermal_state(3.0)) == doctest::Approx(2.0));
    CHECK(std::abs(von_neumann_entropy(epr_state(20.0))) < 1e-6);

    const double clipped[] = {1.0 - 1e-10};
    CHECK(entropy_from_spectrum(clipped) == 0.0);
    const double unphysical[] = {0.9};
    CHECK_THROWS_AS(entropy_from_spectrum(unphysical), InvalidArgument);
    CHECK_THROWS_AS(g_function(-0.1), InvalidArgument);
}

TEST_CASE("williamson decomposition") {
    SUBCASE("thermal") {
        const auto w = williamson_decompose(thermal_state(4.0));
        CHECK(w.eigenvalues[0] == doctest::Approx(4.0));
        CHECK(max_abs_diff(reconstruct(w), 4.0 * Matrix::Identity(2, 2)) < 1e-12);
    }
    SUBCASE("epr") {
        const auto s = epr_state(9.0);
        const auto w = williamson_decompose(s);
        CHECK(w.eigenvalues[0] == doctest::Approx(1.0));
        CHECK(w.eigenvalues[1] == doctest::Approx(1.0));
        CHECK(max_abs_diff(reconstruct(w), s.cm()) < 1e-10);
    }
    SUBCASE("anti-diagonal attack") {
        const auto s = attack_cm(3, 3, 1, -1);
        const auto w = williamson_decompose(s);
        CHECK(max_abs_diff(reconstruct(w), s.cm()) < 1e-10);
        CHECK(w.eigenvalues[0] == doctest::Approx(std::sqrt(8.0)));
        CHECK(w.eigenvalues[1] == doctest::Approx(std::sqrt(8.0)));
    }
    SUBCASE("random") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 30; ++trial) {
            const auto s = cvqkd::testing::random_state(rng, 1 + trial % 4);
            const auto w = williamson_decompose(s);
            CHECK(symplectic_residual(w.s.matrix()) < 1e-8 * std::max(1.0, w.s.matrix().squaredNorm()));
            CHECK(max_abs_diff(reconstruct(w), s.cm()) < 1e-8 * s.cm().cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("purify") {
    const int first1[] = {0};
    const auto p = purify(thermal_state(3.0));
    CHECK(p.pure());
    CHECK(max_abs_diff(reduce(p, first1).cm(), 3.0 * Matrix::Identity(2, 2)) < 1e-12);

    const auto pure_in = epr_state(5.0);
    const auto pp = purify(pure_in);
    CHECK(pp.pure());
    const int last2[] = {2, 3};
    CHECK(max_abs_diff(reduce(pp, last2).cm(), Matrix::Identity(4, 4)) < 1e-8);

    const int first2[] = {0, 1};
    const auto a = attack_cm(3, 3, 2, 2);
    const auto pa = purify(a);
    CHECK(pa.pure());
    CHECK(max_abs_diff(reduce(pa, first2).cm(), a.cm()) < 1e-8);

    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 3;
        const auto s = cvqkd::testing::random_state(rng, n);
        const auto ps = purify(s);
        std::vector<int> kept(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) kept[static_cast<std::size_t>(i)] = i;
        CHECK(ps.pure());
        CHECK(max_abs_diff(reduce(ps, kept).cm(), s.cm()) < 1e-8 * s.cm().cwiseAbs().maxCoeff());
    }

    Matrix bad = 0.5 * Matrix::Identity(2, 2);
    CHECK_THROWS_AS(purify(GaussianState(bad)), InvalidArgument);
}

TEST_CASE("heterodyne dilation") {
    const auto v = heterodyne_dilate(vacuum(), 0);
    CHECK(v.state.cm()(v.x_quadrature, v.x_quadrature) == doctest::Approx(1.0));
    CHECK(v.state.cm()(v.p_quadrature, v.p_quadrature) == doctest::Approx(1.0));
    const auto t = heterodyne_dilate(thermal_state(3.0), 0);
    CHECK(t.state.cm()(t.x_quadrature, t.x_quadrature) == doctest::Approx(2.0));
    CHECK(t.state.cm()(t.p_quadrature, t.p_quadrature) == doctest::Approx(2.0));
    CHECK(t.state.cm()(t.x_quadrature, t.p_quadrature) == doctest::Approx(0.0));

    // Condition the other EPR arm on the heterodyne x outcome.
    const double V = 6.0;
    const auto h = heterodyne_dilate(epr_state(V), 1);
    const LinearOutcome out[] = {{{{h.x_quadrature, 1.0}}, 0.0}};
    const int kept[] = {0};
    const auto c = condition_on_linear_outcomes(h.state, out, kept);
    CHECK(c.state.cm()(0, 0) == doctest::Approx(V - (V * V - 1.0) / (V + 1.0)));
    CHECK(c.state.cm()(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("conditioning") {
    const int kept[] = {0};
    SUBCASE("uncorrelated outcome leaves the state unchanged") {
        const auto s = tensor(thermal_state(3.0), thermal_state(2.0));
        const LinearOutcome out[] = {{{{2, 1.0}}, 0.0}};
        CHECK(max_abs_diff(condition_on_linear_outcomes(s, out, kept).state.cm(), 3.0 * Matrix::Identity(2, 2)) <
              1e-15);
    }
    SUBCASE("homodyne limit on an EPR pair") {
        const double V = 5.0;
        const auto e = epr_state(V);
        const LinearOutcome out[] = {{{{2, 1.0}}, 0.0}};
        const auto c = condition_on_linear_outcomes(e, out, kept);
        CHECK(c.state.cm()(0, 0) == doctest::Approx(1.0 / V));
        CHECK(c.state.cm()(1, 1) == doctest::Approx(V));
        const auto h = condition_homodyne(e, 1, Quadrature::X, kept);
        CHECK(max_abs_diff(h.cm(), c.state.cm()) < 1e-12);
        const auto hp = condition_homodyne(e, 1, Quadrature::P, kept);
        CHECK(hp.cm()(1, 1) == doctest::Approx(1.0 / V));
    }
    SUBCASE("degenerate outcomes") {
        const LinearOutcome out[] = {{{{2, 1.0}}, 0.0}, {{{2, 1.0}}, 0.0}};
        CHECK_THROWS_AS(condition_on_linear_outcomes(epr_state(3.0), out, kept), DegenerateMeasurement);
        ConditionOptions reg;
        reg.relative_regularization = 1e-9;
        CHECK_NOTHROW(condition_on_linear_outcomes(epr_state(3.0), out, kept, reg));
    }
    SUBCASE("non-commuting or kept quadratures are rejected") {
        const LinearOutcome noncommuting[] = {{{{2, 1.0}}, 0.0}, {{{3, 1.0}}, 0.0}};
        CHECK_THROWS_AS(condition_on_linear_outcomes(epr_state(3.0), noncommuting, kept), InvalidArgument);
        const LinearOutcome on_kept[] = {{{{0, 1.0}}, 0.0}};
        CHECK_THROWS_AS(condition_on_linear_outcomes(epr_state(3.0), on_kept, kept), InvalidArgument);
    }
    SUBCASE("property: conditioned states stay physical and shrink") {
        std::mt19937_64 rng(21);
        for (int trial = 0; trial < 30; ++trial) {
            const auto s = cvqkd::testing::random_state(rng, 3);
            const auto h = heterodyne_dilate(s, 2);
            const LinearOutcome out[] = {{{{h.x_quadrature, 1.0}}, 0.0}, {{{h.p_quadrature, 1.0}}, 0.0}};
            const int keep[] = {0, 1};
            const auto c = condition_on_linear_outcomes(h.state, out, keep);
            CHECK(c.state.physical());
            const Matrix diff = reduce(s, keep).cm() - c.state.cm();
            Eigen::SelfAdjointEigenSolver<Matrix> es(diff);
            CHECK(es.eigenvalues().minCoeff() > -1e-10);
        }
    }
}
