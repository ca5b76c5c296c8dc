#include "doctest.h"

#include "fedq/geometry.hpp"
#include "fedq/serialize.hpp"
#include "support.hpp"

using namespace fedq;
using namespace fedq::test;

namespace {

using E = GradedElement<QQi>;

E ymono(int n, int cap, Exps e, QQi c = QQi(1), int J = 0) { return y_monomial<QQi>(n, cap, J, e, c); }

QQi iq(Rational r) { return QQi(Rational(), r); }

FiberForm<QQi> std_fiber(int n, int J = 0) { return constant_fiber<QQi>(standard_omega(n), n, J); }

FiberForm<QQi> std_weyl(int n, int J = 0)
{
    auto s = standard_sigma<QQi>(n, J);
    return FiberForm<QQi>::weyl(n, jm_inverse(s, n));
}

E random_el(Rng& rng, int n, int cap, int J, int terms, int kmin = 0, int kmax = -1)
{
    return random_element<QQi>(n, cap, J, rng, terms, kmin, kmax, 0.4);
}

// Random non-constant fiber form omega = G^{-1}/2 + (i/2) sigma^{-1} from a compatible curved chart.
FiberForm<QQi> curved_fiber(Rng& rng, int n, int J, int cap)
{
    auto sigma = standard_sigma<QQi>(n, J);
    JetMatrix<QQi> seed = jm_identity<QQi>(n, n, J);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Jet<QQi> x = random_jet<QQi>(n, J, rng, 0.3, false);
            x.coeff_mut(0) = QQi(i == j ? 1 : 0);
            seed[std::size_t(i) * n + j] = seed[std::size_t(j) * n + i] = x;
        }
    return build_chart(sigma, seed, MetricInput::Seed, cap).omega;
}

} // namespace

TEST_CASE("wick_mul y1 y2 with standard omega")
{
    auto w = std_fiber(2);
    E r = wick_mul(ymono(2, 4, {1, 0}), ymono(2, 4, {0, 1}), w);
    E want = ymono(2, 4, {1, 1});
    want.add(1, 0u, 0, Jet<QQi>::constant(2, 0, iq(Rational(1, 2))));
    CHECK(vanishes(r - want));
}

TEST_CASE("wick_mul unit law")
{
    Rng rng(21);
    auto w = std_fiber(4, 3);
    E one = unit_element<QQi>(4, 5, 3);
    for (int trial = 0; trial < 5; ++trial) {
        E t = random_el(rng, 4, 5, 3, 8);
        CHECK(vanishes(wick_mul(one, t, w) - t));
        CHECK(vanishes(wick_mul(t, one, w) - t));
    }
}

TEST_CASE("wick_mul agrees with exponential-expansion oracle")
{
    Rng rng(22);
    for (int n : {2, 4}) {
        auto wq = standard_omega(n);
        // a non-standard constant form as well
        std::vector<QQi> wq2 = wq;
        wq2[0] = QQi(Rational(3, 4));
        wq2[1] = QQi(Rational(1, 5), Rational(1, 2));
        wq2[n] = QQi(Rational(1, 5), Rational(-1, 2));
        for (const auto& wv : {wq, wq2}) {
            auto w = constant_fiber<QQi>(wv, n, 0);
            const MonomialTable& t = MonomialTable::get(n);
            for (int trial = 0; trial < 6; ++trial) {
                E a(n, 8), b(n, 8);
                Poly pa, pb;
                for (int q = 0; q < 3; ++q) {
                    std::uniform_int_distribution<int> pick(t.count(0), t.count(2) - 1);
                    int ia = pick(rng), ib = pick(rng);
                    QQi ca = random_scalar<QQi>(rng), cb = random_scalar<QQi>(rng);
                    a.add(0, 0u, ia, Jet<QQi>::constant(n, 0, ca));
                    b.add(0, 0u, ib, Jet<QQi>::constant(n, 0, cb));
                    auto ea = t.exps(ia), eb = t.exps(ib);
                    pa[{ea[0], ea[1], ea[2], ea[3]}] += ca;
                    pb[{eb[0], eb[1], eb[2], eb[3]}] += cb;
                }
                HPoly want = wick_oracle(poly_clean(pa), poly_clean(pb), wv, n, 4);
                E got = wick_mul(a, b, w);
                got.prune();
                CHECK(element_constants(got) == want);
            }
        }
    }
}

TEST_CASE("weyl_mul examples")
{
    auto w = std_weyl(2);
    E r = wick_mul(ymono(2, 4, {1, 0}), ymono(2, 4, {0, 1}), w);
    E want = ymono(2, 4, {1, 1});
    want.add(1, 0u, 0, Jet<QQi>::constant(2, 0, iq(Rational(1, 2))));
    CHECK(vanishes(r - want));
    for (int n : {2, 4}) {
        auto wn = std_weyl(n);
        auto sinv = jm_inverse(standard_sigma<QQi>(n, 0), n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Exps ei{}, ej{};
                ei[i] = 1;
                ej[j] = 1;
                E c = graded_commutator(ymono(n, 4, ei), ymono(n, 4, ej), wn, 4);
                E want2(n, 4);
                want2.add(1, 0u, 0, QQi(Rational(), Rational(1)) * sinv[std::size_t(i) * n + j]);
                CHECK(vanishes(c - want2));
            }
    }
    Rng rng(23);
    E one = unit_element<QQi>(4, 5, 0);
    E t = random_el(rng, 4, 5, 0, 6);
    CHECK(vanishes(wick_mul(one, t, std_weyl(4)) - t));
}

TEST_CASE("dagger examples and anti-automorphism")
{
    E y1 = ymono(2, 4, {1, 0});
    CHECK(vanishes(dagger(y1) - y1));
    E i1 = unit_element<QQi>(2, 4, 0).times_i();
    CHECK(vanishes(dagger(i1) + i1));
    Rng rng(24);
    auto w = curved_fiber(rng, 2, 3, 5);
    for (int trial = 0; trial < 4; ++trial) {
        E t = random_el(rng, 2, 5, 3, 5, 0, 0), s = random_el(rng, 2, 5, 3, 5, 0, 0);
        CHECK(vanishes(dagger(wick_mul(t, s, w)) - wick_mul(dagger(s), dagger(t), w)));
        CHECK(vanishes(dagger(dagger(t)) - t));
    }
}

TEST_CASE("delta_op examples and nilpotence")
{
    E r = delta_op(ymono(2, 4, {1, 1}));
    E want(2, 4);
    want.add(0, 0b01u, Exps{0, 1}, Jet<QQi>::constant(2, 0, QQi(1)));
    want.add(0, 0b10u, Exps{1, 0}, Jet<QQi>::constant(2, 0, QQi(1)));
    CHECK(vanishes(r - want));
    CHECK(delta_op(unit_element<QQi>(2, 4, 2)).empty());
    Rng rng(25);
    for (int trial = 0; trial < 20; ++trial) {
        E t = random_el(rng, 4, 6, 2, 10);
        CHECK(vanishes(delta_op(delta_op(t))));
        CHECK(vanishes(delta_inv_op(delta_inv_op(t))));
    }
}

TEST_CASE("delta_inv_op examples")
{
    E a(2, 4);
    a.add(0, 0b01u, Exps{0, 1}, Jet<QQi>::constant(2, 0, QQi(1)));
    E want = ymono(2, 4, {1, 1}, QQi(Rational(1, 2)));
    CHECK(vanishes(delta_inv_op(a) - want));
    CHECK(delta_inv_op(ymono(2, 4, {2, 0})).empty());
}

TEST_CASE("tau_project and Hodge decomposition")
{
    E a = unit_element<QQi>(2, 4, 0);
    E b(2, 4);
    b.add(0, 0b01u, Exps{0, 1}, Jet<QQi>::constant(2, 0, QQi(1)));
    CHECK(vanishes(tau_project(a + b) - a));
    CHECK(tau_project(ymono(2, 4, {1, 0})).empty());
    Rng rng(26);
    for (int trial = 0; trial < 50; ++trial) {
        int n = trial % 2 ? 4 : 2;
        // delta^{-1} raises Deg by one, so stay below the cap
        E t = random_el(rng, n, 6, 2, 12).deg_range(0, 5);
        E h = delta_op(delta_inv_op(t)) + delta_inv_op(delta_op(t)) + tau_project(t);
        CHECK(vanishes(h - t));
    }
}

TEST_CASE("graded commutator examples")
{
    auto w = std_fiber(2);
    E c = graded_commutator(ymono(2, 4, {1, 0}), ymono(2, 4, {0, 1}), w, 4);
    E want(2, 4);
    want.add(1, 0u, 0, Jet<QQi>::constant(2, 0, QQi(Rational(), Rational(1))));
    CHECK(vanishes(c - want));
    Rng rng(27);
    auto wc = curved_fiber(rng, 4, 2, 5);
    for (int trial = 0; trial < 3; ++trial) {
        E t = random_el(rng, 4, 5, 2, 6, 0, 0) + random_el(rng, 4, 5, 2, 3, 2, 2);
        CHECK(vanishes(graded_commutator(t, t, wc, 5)));
    }
}

TEST_CASE("delta equals (2i/hbar) ad of delta^{-1} sigma")
{
    Rng rng(28);
    for (int n : {2, 4}) {
        const int J = 3, cap = 5;
        auto w = curved_fiber(rng, n, J, cap + 1);
        auto sig = standard_sigma<QQi>(n, J);
        E sform(n, cap + 1);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) sform.add(0, (1u << a) | (1u << b), 0, sig[std::size_t(a) * n + b]);
        E ds = delta_inv_op(sform);
        for (int trial = 0; trial < 5; ++trial) {
            E t = random_el(rng, n, cap, J, 6);
            E lhs = delta_op(t);
            E rhs = i_ad(ds, t, w, cap).scaled(Rational(2));
            CHECK(vanishes(lhs - rhs));
        }
    }
}

TEST_CASE("hbar_divide")
{
    E a(2, 4);
    a.add(1, 0u, Exps{1, 0}, Jet<QQi>::constant(2, 0, QQi(1)));
    CHECK(vanishes(hbar_divide(a) - ymono(2, 4, {1, 0})));
    CHECK_THROWS_WITH_AS(hbar_divide(ymono(2, 4, {1, 0})), "element not divisible by ℏ", AlgebraError);
    Rng rng(29);
    auto w = curved_fiber(rng, 2, 3, 6);
    for (int trial = 0; trial < 5; ++trial) {
        E a1 = random_el(rng, 2, 6, 3, 4).filter([](int, int, int nn) { return nn >= 1; });
        E b1 = random_el(rng, 2, 6, 3, 4).filter([](int, int, int nn) { return nn >= 1; });
        E c = graded_commutator(a1, b1, w, 6);
        E q;
        CHECK_NOTHROW(q = hbar_divide(c));
        CHECK(vanishes(q - commutator_over_hbar(a1, b1, w, 6).with_cap(4)));
    }
}

TEST_CASE("associativity of Wick and Weyl products")
{
    Rng rng(30);
    for (int n : {2, 4}) {
        const int cap = n == 2 ? 6 : 5, J = 2;
        auto w = curved_fiber(rng, n, J, cap);
        auto weyl = std_weyl(n, J);
        for (int trial = 0; trial < 3; ++trial) {
            E a = random_el(rng, n, cap, J, 4), b = random_el(rng, n, cap, J, 4), c = random_el(rng, n, cap, J, 4);
            CHECK(vanishes(wick_mul(wick_mul(a, b, w), c, w) - wick_mul(a, wick_mul(b, c, w), w)));
            CHECK(vanishes(wick_mul(wick_mul(a, b, weyl), c, weyl) - wick_mul(a, wick_mul(b, c, weyl), weyl)));
        }
    }
}

TEST_CASE("Deg additivity and filtration")
{
    Rng rng(31);
    auto w = curved_fiber(rng, 2, 2, 8);
    for (int trial = 0; trial < 5; ++trial) {
        E a = random_el(rng, 2, 8, 2, 3).deg_range(0, 3), b = random_el(rng, 2, 8, 2, 3).deg_range(0, 4);
        int da = 0, db = 0;
        for (const auto& [k, f] : a.terms()) da = std::max(da, a.total_degree(k));
        for (const auto& [k, f] : b.terms()) db = std::max(db, b.total_degree(k));
        E ab = wick_mul(a, b, w);
        for (const auto& [k, f] : ab.terms()) CHECK(ab.total_degree(k) <= da + db);
        // homogeneous inputs give a homogeneous product
        E ah = a.deg_part(da), bh = b.deg_part(db);
        E p = wick_mul(ah, bh, w);
        for (const auto& [k, f] : p.terms()) CHECK(p.total_degree(k) == da + db);
    }
}

TEST_CASE("center: commuting with every generator forces symmetric degree zero")
{
    Rng rng(32);
    const int n = 2, cap = 6;
    auto w = std_fiber(n, 2);
    E z = random_el(rng, n, cap, 2, 4).filter([](int, int k, int nn) { return k == 0 && nn == 0; });
    E t = z + random_el(rng, n, cap, 2, 3, 0, 0).filter([](int, int, int nn) { return nn >= 1; });
    bool central_z = true, central_t = true;
    for (int i = 0; i < n; ++i) {
        Exps e{};
        e[i] = 1;
        E yi = y_monomial<QQi>(n, cap, 2, e);
        central_z = central_z && vanishes(graded_commutator(yi, z, w, cap));
        central_t = central_t && vanishes(graded_commutator(yi, t, w, cap));
    }
    CHECK(central_z);
    CHECK_FALSE(central_t);
}

TEST_CASE("graded element serialization")
{
    Rng rng(33);
    E t = random_el(rng, 4, 5, 2, 6);
    auto j = to_json(t);
    CHECK(j["deg_cap"] == 5);
    CHECK(vanishes(element_from_json<QQi>(j) - t));
}
