#include "doctest.h"

#include "fedq/geometry.hpp"
#include "support.hpp"

#include <Eigen/Dense>

using namespace fedq;
using namespace fedq::test;

namespace {

using E = GradedElement<QQi>;
using G = ChartGeometry<QQi>;

Jet<QQi> cq(int n, int order, Rational r) { return Jet<QQi>::constant(n, order, QQi(r)); }

// i/hbar ad(a) restricted to the chart's fiber form.
E iad(const E& a, const E& b, const G& g, int cap) { return i_ad(a, b, g.omega, cap); }

} // namespace

TEST_CASE("compatible_triple fixed point on the flat pair")
{
    auto sigma = standard_sigma<QQi>(4, 3);
    auto seed = jm_identity<QQi>(4, 4, 3);
    auto [g, j] = compatible_triple(sigma, seed, 4);
    CHECK(jm_is_zero(jm_add(g, seed, QQi(-1))));
    // J^i_j = sigma_{ij} for the identity metric
    CHECK(jm_is_zero(jm_add(j, sigma, QQi(-1))));
}

TEST_CASE("compatible_triple matches an eigendecomposition polar factor")
{
    const int n = 4;
    std::srand(41);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::Matrix4d s;
        {
            Eigen::Matrix4d m = Eigen::Matrix4d::Random();
            s = m * m.transpose() + 0.5 * Eigen::Matrix4d::Identity();
        }
        Eigen::Matrix4d sig = Eigen::Matrix4d::Zero();
        sig(0, 1) = -1;
        sig(1, 0) = 1;
        sig(2, 3) = -1;
        sig(3, 2) = 1;
        // S^{-1/2} sigma S^{-1/2} is antisymmetric M; J = S^{-1/2} M (M^T M)^{-1/2} S^{1/2}
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(s);
        Eigen::Matrix4d sh = es.operatorSqrt(), shi = es.operatorInverseSqrt();
        Eigen::Matrix4d m = shi * sig * shi;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es2(m.transpose() * m);
        Eigen::Matrix4d want_j = shi * m * es2.operatorInverseSqrt() * sh;
        Eigen::Matrix4d want_g = want_j.transpose() * sig;

        JetMatrix<cplx> sj(16), seedj(16);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                sj[std::size_t(i) * n + k] = Jet<cplx>::constant(n, 0, cplx(sig(i, k)));
                seedj[std::size_t(i) * n + k] = Jet<cplx>::constant(n, 0, cplx(s(i, k)));
            }
        auto [g, j] = compatible_triple(sj, seedj, n);
        double err = 0;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                err = std::max(err, std::abs(j[std::size_t(i) * n + k].value() - want_j(i, k)));
                err = std::max(err, std::abs(g[std::size_t(i) * n + k].value() - want_g(i, k)));
            }
        CHECK(err < 1e-12);
    }
}

TEST_CASE("compatible_triple rejects incompatible exact seeds and degenerate float input")
{
    auto sigma = standard_sigma<QQi>(2, 1);
    auto seed = jm_identity<QQi>(2, 2, 1);
    seed[0] = cq(2, 1, Rational(2));
    CHECK_THROWS_AS(compatible_triple(sigma, seed, 2), ConfigError);
}

TEST_CASE("compatible triple invariants on random curved seeds")
{
    Rng rng(42);
    for (int n : {2, 4}) {
        for (int trial = 0; trial < 3; ++trial) {
            auto g = random_chart<QQi>(n, 4, 4, rng);
            JetMatrix<QQi> jj = jm_mul(g.acs, g.acs, n);
            CHECK(jm_is_zero(jm_add(jj, jm_identity<QQi>(n, n, 4))));
            // G = J^T sigma symmetric, and sigma(Jv, Jw) = sigma(v, w)
            CHECK(jm_is_zero(jm_add(g.metric, jm_transpose(g.metric, n), QQi(-1))));
            JetMatrix<QQi> inv = jm_mul(jm_mul(jm_transpose(g.acs, n), g.sigma, n), g.acs, n);
            CHECK(jm_is_zero(jm_add(inv, g.sigma, QQi(-1))));
            CHECK(g.metric[0].value() == QQi(1));
        }
    }
}

TEST_CASE("direct metric input")
{
    auto sigma = standard_sigma<QQi>(2, 2);
    auto metric = jm_identity<QQi>(2, 2, 2);
    auto g = build_chart(sigma, metric, MetricInput::Direct, 3);
    CHECK(jm_is_zero(jm_add(g.acs, sigma, QQi(-1))));
    metric[0] = cq(2, 2, Rational(2));
    CHECK_THROWS_WITH_AS(build_chart(sigma, metric, MetricInput::Direct, 3),
                         "chart: metric is not compatible with sigma (J^2 != -1)", ConfigError);
}

TEST_CASE("levi_civita examples")
{
    const int n = 2, order = 3;
    auto g = jm_identity<QQi>(n, n, order);
    auto lc0 = levi_civita(g, jm_inverse(g, n), n);
    CHECK(all_vanish(lc0));
    // G = diag(1 + x^1, 1): Gamma^1_11 = 1/2 at the base point
    g[0] = g[0] + Jet<QQi>::variable(n, order, 0);
    auto lc = levi_civita(g, jm_inverse(g, n), n);
    CHECK(lc[idx3(n, 0, 0, 0)].value() == QQi(Rational(1, 2)));
    CHECK(lc[idx3(n, 0, 0, 0)].valid_order() == order - 1);
}

TEST_CASE("levi_civita symmetry and metricity")
{
    Rng rng(43);
    for (int n : {2, 4}) {
        auto seed = random_seed<QQi>(n, 4, rng);
        auto gi = jm_inverse(seed, n);
        auto lc = levi_civita(seed, gi, n);
        std::vector<Jet<QQi>> res;
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    res.push_back(lc[idx3(n, k, i, j)] - lc[idx3(n, k, j, i)]);
                    Jet<QQi> m = seed[std::size_t(i) * n + j].partial(k);
                    for (int l = 0; l < n; ++l) {
                        m -= lc[idx3(n, l, k, i)] * seed[std::size_t(l) * n + j];
                        m -= lc[idx3(n, l, k, j)] * seed[std::size_t(i) * n + l];
                    }
                    res.push_back(m);
                }
        CHECK(all_vanish(res));
    }
}

TEST_CASE("nijenhuis examples")
{
    Rng rng(44);
    auto flat = flat_chart<QQi>(4, 3, 4);
    CHECK(all_vanish(flat.nijenhuis));
    for (int trial = 0; trial < 3; ++trial) {
        auto g2 = random_chart<QQi>(2, 4, 4, rng);
        CHECK(all_vanish(g2.nijenhuis));
    }
    auto g4 = random_chart<QQi>(4, 4, 4, rng);
    std::vector<Jet<QQi>> anti;
    bool nonzero = false;
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                anti.push_back(g4.nijenhuis[idx3(4, k, i, j)] + g4.nijenhuis[idx3(4, k, j, i)]);
                nonzero = nonzero || !g4.nijenhuis[idx3(4, k, i, j)].is_zero();
            }
    CHECK(all_vanish(anti));
    CHECK(nonzero);
}

TEST_CASE("yano connection: Kahler reduction and compatibility")
{
    Rng rng(45);
    auto flat = flat_chart<QQi>(4, 3, 4);
    CHECK(all_vanish(flat.yano));
    auto g2 = random_chart<QQi>(2, 4, 4, rng);
    std::vector<Jet<QQi>> d;
    for (std::size_t k = 0; k < g2.yano.size(); ++k) d.push_back(g2.yano[k] - g2.lc[k]);
    CHECK(all_vanish(d));
    for (int trial = 0; trial < 3; ++trial) {
        auto g4 = random_chart<QQi>(4, 4, 4, rng);
        CHECK(all_vanish(nabla_sigma_residual(g4)));
        CHECK(all_vanish(nabla_metric_residual(g4)));
    }
}

TEST_CASE("yano connection in float mode")
{
    Rng rng(46);
    auto g4 = random_chart<cplx>(4, 4, 4, rng);
    CHECK(all_vanish(nabla_sigma_residual(g4), 1e-9));
    CHECK(all_vanish(nabla_metric_residual(g4), 1e-9));
}

TEST_CASE("torsion equals minus a quarter of Nijenhuis")
{
    Rng rng(47);
    auto flat = flat_chart<QQi>(4, 3, 4);
    CHECK(all_vanish(flat.torsion));
    CHECK(all_vanish(flat.curvature));
    for (int trial = 0; trial < 3; ++trial) {
        auto g = random_chart<QQi>(4, 4, 4, rng);
        std::vector<Jet<QQi>> d;
        for (std::size_t k = 0; k < g.torsion.size(); ++k) d.push_back(g.torsion[k] + g.nijenhuis[k].scaled(Rational(1, 4)));
        CHECK(all_vanish(d));
        std::vector<Jet<QQi>> anti;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k)
                    for (int l = 0; l < 4; ++l) anti.push_back(g.curvature[idx4(4, i, j, k, l)] + g.curvature[idx4(4, i, j, l, k)]);
        CHECK(all_vanish(anti));
    }
}

TEST_CASE("first Bianchi identity on a Kahler chart")
{
    Rng rng(48);
    auto g = random_chart<QQi>(2, 5, 4, rng);
    std::vector<Jet<QQi>> cyc;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    cyc.push_back(g.curvature[idx4(2, i, j, k, l)] + g.curvature[idx4(2, i, k, l, j)] +
                                  g.curvature[idx4(2, i, l, j, k)]);
    CHECK(all_vanish(cyc));
    bool curved = false;
    for (const auto& r : g.curvature) curved = curved || !r.is_zero();
    CHECK(curved);
}

TEST_CASE("hat tensors")
{
    Rng rng(49);
    auto flat = flat_chart<QQi>(4, 3, 4);
    CHECK(flat.t_hat.is_zero());
    CHECK(flat.r_hat.is_zero());
    for (int trial = 0; trial < 2; ++trial) {
        auto g = random_chart<QQi>(4, 5, 4, rng);
        CHECK_FALSE(g.t_hat.is_zero());
        CHECK(delta_op(g.t_hat).is_zero());
        CHECK((nabla(g.t_hat, g) - delta_op(g.r_hat)).is_zero());
        CHECK(nabla(g.r_hat, g).is_zero());
    }
}

TEST_CASE("nabla of a function is its differential")
{
    const int n = 2;
    Jet<QQi> f = Jet<QQi>::variable(n, 3, 0) * Jet<QQi>::variable(n, 3, 1) + cq(n, 3, Rational(2));
    auto g = flat_chart<QQi>(n, 3, 4);
    E df = nabla(function_element(f, 4), g);
    E want(n, 4);
    want.add(0, 0b01u, 0, f.partial(0));
    want.add(0, 0b10u, 0, f.partial(1));
    CHECK((df - want).is_zero());
}

TEST_CASE("nabla Leibniz rule")
{
    Rng rng(50);
    auto g = random_chart<QQi>(4, 4, 4, rng);
    for (int trial = 0; trial < 3; ++trial) {
        E a = random_element<QQi>(4, 4, 4, rng, 3, 0, 1, 0.3);
        E b = random_element<QQi>(4, 4, 4, rng, 3, 0, 1, 0.3);
        E lhs = nabla(wick_mul(a, b, g.omega), g);
        E sgn = a.filter([](int, int k, int) { return k % 2 == 0; }) - a.filter([](int, int k, int) { return k % 2 == 1; });
        E rhs = wick_mul(nabla(a, g), b, g.omega) + wick_mul(sgn, nabla(b, g), g.omega);
        CHECK((lhs - rhs).is_zero());
    }
}

TEST_CASE("delta nabla + nabla delta = (i/hbar) ad T-hat")
{
    Rng rng(51);
    for (int trial = 0; trial < 3; ++trial) {
        auto g = random_chart<QQi>(4, 4, 5, rng);
        E t = random_element<QQi>(4, 5, 4, rng, 5, 0, 2, 0.3);
        E lhs = delta_op(nabla(t, g)) + nabla(delta_op(t), g);
        E rhs = iad(g.t_hat, t, g, 5);
        CHECK((lhs - rhs).is_zero());
    }
}

TEST_CASE("nabla squared = -(i/hbar) ad R-hat")
{
    Rng rng(52);
    for (int n : {2, 4}) {
        auto g = random_chart<QQi>(n, 5, 5, rng);
        for (int trial = 0; trial < 2; ++trial) {
            E t = random_element<QQi>(n, 5, 5, rng, 5, 0, 1, 0.3);
            E res = nabla(nabla(t, g), g) + iad(g.r_hat, t, g, 5);
            CHECK(res.is_zero());
        }
    }
}

TEST_CASE("nabla commutes with dagger")
{
    Rng rng(53);
    auto g = random_chart<QQi>(4, 4, 4, rng);
    E t = random_element<QQi>(4, 4, 4, rng, 6, 0, 2, 0.3);
    CHECK((nabla(dagger(t), g) - dagger(nabla(t, g))).is_zero());
}
