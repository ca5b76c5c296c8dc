#pragma once

#include "fedq/geometry.hpp"

#include <random>

namespace fedq {

using Rng = std::mt19937_64;

inline Rational small_rational(Rng& rng)
{
    std::uniform_int_distribution<int> num(-6, 6), den(1, 4);
    return Rational(num(rng), den(rng));
}

template <class S>
S random_scalar(Rng& rng, bool complex_values = true)
{
    if constexpr (ScalarOps<S>::exact) {
        Rational re = small_rational(rng);
        Rational im = complex_values ? small_rational(rng) : Rational();
        return QQi(re, im);
    } else {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        return {u(rng), complex_values ? u(rng) : 0.0};
    }
}

template <class S>
Jet<S> random_jet(int dim, int order, Rng& rng, double density = 1.0, bool complex_values = true)
{
    Jet<S> j(dim, order);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < j.size(); ++i)
        if (u(rng) < density) j.coeff_mut(i) = random_scalar<S>(rng, complex_values);
    return j;
}

// Random W-valued form with `terms` nonzero terms, Deg <= cap, form degree in [kmin, kmax].
template <class S>
GradedElement<S> random_element(int dim, int cap, int jet_order, Rng& rng, int terms, int kmin = 0, int kmax = -1,
                                double density = 0.5)
{
    if (kmax < 0) kmax = dim;
    const MonomialTable& t = MonomialTable::get(dim);
    GradedElement<S> e(dim, cap);
    std::uniform_int_distribution<int> pick_deg(0, cap);
    std::uniform_int_distribution<unsigned> pick_mask(0, (1u << dim) - 1);
    int guard = 0;
    while (static_cast<int>(e.size()) < terms && guard++ < 100 * terms) {
        int deg = pick_deg(rng);
        std::uniform_int_distribution<int> pick_p(0, deg / 2);
        int p = pick_p(rng);
        int n = deg - 2 * p;
        std::uniform_int_distribution<int> pick_alpha(t.count(n - 1), t.count(n) - 1);
        unsigned mask = pick_mask(rng);
        int k = form_degree(mask);
        if (k < kmin || k > kmax) continue;
        e.add(p, mask, pick_alpha(rng), random_jet<S>(dim, jet_order, rng, density));
    }
    return e;
}

// Symmetric real seed metric id + (random higher jet terms).
template <class S>
JetMatrix<S> random_seed(int n, int order, Rng& rng, double density = 0.5)
{
    JetMatrix<S> seed = jm_identity<S>(n, n, order);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Jet<S> x = random_jet<S>(n, order, rng, density, false);
            x.coeff_mut(0) = ScalarOps<S>::from_int(i == j ? 1 : 0);
            seed[std::size_t(i) * n + j] = seed[std::size_t(j) * n + i] = x;
        }
    return seed;
}

template <class S>
ChartGeometry<S> random_chart(int n, int order, int cap, Rng& rng, double density = 0.5)
{
    return build_chart(standard_sigma<S>(n, order), random_seed<S>(n, order, rng, density), MetricInput::Seed, cap);
}

} // namespace fedq
