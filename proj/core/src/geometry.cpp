#include "fedq/geometry.hpp"

#include <bit>

namespace fedq {

namespace {

template <class S>
Jet<S> zero_like(const Jet<S>& j, int valid)
{
    return Jet<S>(j.dim(), std::min(valid, j.order()), std::min(valid, j.order()));
}

template <class S>
bool jm_equal(const JetMatrix<S>& a, const JetMatrix<S>& b)
{
    for (std::size_t i = 0; i < a.size(); ++i) {
        Jet<S> d = a[i] - b[i];
        if (ScalarOps<S>::exact) {
            if (!d.is_zero()) return false;
        } else if (d.max_abs() > 1e-13 * std::max(1.0, a[i].max_abs())) {
            return false;
        }
    }
    return true;
}

} // namespace

template <class S>
JetMatrix<S> standard_sigma(int dim, int jet_order)
{
    if (dim % 2 != 0) throw ConfigError("chart dimension must be even");
    JetMatrix<S> s(std::size_t(dim) * dim, Jet<S>(dim, jet_order));
    for (int a = 0; a < dim / 2; ++a) {
        s[std::size_t(2 * a) * dim + 2 * a + 1] = Jet<S>::constant(dim, jet_order, ScalarOps<S>::from_int(-1));
        s[std::size_t(2 * a + 1) * dim + 2 * a] = Jet<S>::constant(dim, jet_order, ScalarOps<S>::from_int(1));
    }
    return s;
}

template <class S>
std::pair<JetMatrix<S>, JetMatrix<S>> compatible_triple(const JetMatrix<S>& sigma, const JetMatrix<S>& seed, int n)
{
    using Ops = ScalarOps<S>;
    JetMatrix<S> seed_inv = jm_inverse(seed, n);
    JetMatrix<S> a = jm_mul(seed_inv, sigma, n);
    JetMatrix<S> b = jm_scale(jm_mul(a, a, n), Rational(-1));
    const int jdim = seed[0].dim();
    const int order = b[0].order();
    if (Ops::exact) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                S want = Ops::from_int(i == j ? 1 : 0);
                if (!(b[std::size_t(i) * n + j].value() == want))
                    throw ConfigError("exact mode needs a seed metric compatible with sigma at the base point");
            }
    }
    // Denman-Beavers: Y -> B^{1/2}, Z -> B^{-1/2}.
    JetMatrix<S> y = b;
    JetMatrix<S> z = jm_identity<S>(n, jdim, order);
    for (auto& e : z) e = e.truncated(jm_valid(b));
    bool converged = false;
    for (int step = 0; step < 50; ++step) {
        JetMatrix<S> zi = jm_inverse(z, n, "polar decomposition failed");
        JetMatrix<S> yi = jm_inverse(y, n, "polar decomposition failed");
        JetMatrix<S> y2 = jm_scale(jm_add(y, zi), Rational(1, 2));
        JetMatrix<S> z2 = jm_scale(jm_add(z, yi), Rational(1, 2));
        bool same = jm_equal(y2, y) && jm_equal(z2, z);
        y = std::move(y2);
        z = std::move(z2);
        if (same) {
            converged = true;
            break;
        }
    }
    if (!converged) throw AlgebraError("polar decomposition failed");
    JetMatrix<S> acs = jm_mul(a, z, n);
    JetMatrix<S> g = jm_mul(jm_transpose(acs, n), sigma, n);
    return {g, acs};
}

template <class S>
Rank3<S> levi_civita(const JetMatrix<S>& g, const JetMatrix<S>& g_inv, int n)
{
    // dg[l][i][j] = d_l G_{ij}
    std::vector<Jet<S>> dg(std::size_t(n) * n * n);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) dg[idx3(n, l, i, j)] = g[std::size_t(i) * n + j].partial(l);
    Rank3<S> out(std::size_t(n) * n * n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Jet<S> acc = zero_like(dg[0], dg[0].valid_order());
                for (int l = 0; l < n; ++l) {
                    Jet<S> bracket = dg[idx3(n, i, l, j)] + dg[idx3(n, j, i, l)] - dg[idx3(n, l, i, j)];
                    acc += g_inv[std::size_t(k) * n + l] * bracket;
                }
                out[idx3(n, k, i, j)] = acc.scaled(Rational(1, 2));
            }
    return out;
}

template <class S>
Rank3<S> nijenhuis(const JetMatrix<S>& acs, int n)
{
    // dJ[l][k][i] = d_l J^k_i
    std::vector<Jet<S>> dj(std::size_t(n) * n * n);
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i) dj[idx3(n, l, k, i)] = acs[std::size_t(k) * n + i].partial(l);
    auto J = [&](int a, int b) -> const Jet<S>& { return acs[std::size_t(a) * n + b]; };
    Rank3<S> out(std::size_t(n) * n * n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Jet<S> acc = zero_like(dj[0], dj[0].valid_order());
                for (int l = 0; l < n; ++l) {
                    acc += dj[idx3(n, l, k, i)] * J(l, j);
                    acc += J(k, l) * dj[idx3(n, i, l, j)];
                    acc -= dj[idx3(n, l, k, j)] * J(l, i);
                    acc -= J(k, l) * dj[idx3(n, j, l, i)];
                }
                out[idx3(n, k, i, j)] = acc;
            }
    return out;
}

template <class S>
Rank3<S> yano(const Rank3<S>& lc, const Rank3<S>& nij, const JetMatrix<S>& g, const JetMatrix<S>& g_inv, int n)
{
    Rank3<S> out(std::size_t(n) * n * n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Jet<S> acc = nij[idx3(n, k, i, j)];
                for (int s = 0; s < n; ++s) {
                    Jet<S> inner = zero_like(acc, acc.valid_order());
                    for (int r = 0; r < n; ++r) {
                        inner += nij[idx3(n, r, s, i)] * g[std::size_t(r) * n + j];
                        inner += nij[idx3(n, r, s, j)] * g[std::size_t(r) * n + i];
                    }
                    acc += g_inv[std::size_t(k) * n + s] * inner;
                }
                out[idx3(n, k, i, j)] = lc[idx3(n, k, i, j)] - acc.scaled(Rational(1, 8));
            }
    return out;
}

template <class S>
std::pair<Rank3<S>, Rank4<S>> torsion_curvature(const Rank3<S>& gamma, int n)
{
    Rank3<S> t(std::size_t(n) * n * n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) t[idx3(n, k, i, j)] = gamma[idx3(n, k, i, j)] - gamma[idx3(n, k, j, i)];
    Rank4<S> r(std::size_t(n) * n * n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    Jet<S> acc = gamma[idx3(n, i, l, j)].partial(k) - gamma[idx3(n, i, k, j)].partial(l);
                    for (int m = 0; m < n; ++m) {
                        acc += gamma[idx3(n, i, k, m)] * gamma[idx3(n, m, l, j)];
                        acc -= gamma[idx3(n, i, l, m)] * gamma[idx3(n, m, k, j)];
                    }
                    r[idx4(n, i, j, k, l)] = acc;
                }
    return {t, r};
}

template <class S>
std::pair<GradedElement<S>, GradedElement<S>> hat_tensors(const JetMatrix<S>& sigma, const Rank3<S>& torsion,
                                                           const Rank4<S>& curvature, int n, int cap)
{
    GradedElement<S> th(n, cap), rh(n, cap);
    const MonomialTable& t = MonomialTable::get(n);
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = i1 + 1; i2 < n; ++i2) {
            const unsigned mask = (1u << i1) | (1u << i2);
            for (int j = 0; j < n; ++j) {
                Jet<S> acc = zero_like(torsion[0], torsion[0].valid_order());
                for (int l = 0; l < n; ++l) acc += sigma[std::size_t(j) * n + l] * torsion[idx3(n, l, i1, i2)];
                th.add(0, mask, t.raise(0, j), acc);
            }
            for (int j1 = 0; j1 < n; ++j1)
                for (int j2 = 0; j2 < n; ++j2) {
                    Jet<S> acc = zero_like(curvature[0], curvature[0].valid_order());
                    for (int l = 0; l < n; ++l) acc += sigma[std::size_t(j1) * n + l] * curvature[idx4(n, l, j2, i1, i2)];
                    rh.add(0, mask, t.raise(t.raise(0, j1), j2), acc.scaled(Rational(1, 2)));
                }
        }
    th.prune();
    rh.prune();
    return {th, rh};
}

template <class S>
ChartGeometry<S> build_chart(const JetMatrix<S>& sigma, const JetMatrix<S>& metric, MetricInput kind, int cap)
{
    using Ops = ScalarOps<S>;
    const int n = sigma[0].dim();
    if (std::size_t(n) * n != sigma.size() || metric.size() != sigma.size()) throw ConfigError("chart: sigma/metric shape mismatch");
    for (const auto& s : sigma)
        if (!s.is_constant()) throw ConfigError("chart: sigma must be constant (Darboux chart)");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!(sigma[std::size_t(i) * n + j] + sigma[std::size_t(j) * n + i]).is_zero())
                throw ConfigError("chart: sigma must be antisymmetric");
    ChartGeometry<S> g;
    g.dim = n;
    g.cap = cap;
    g.jet_order = metric[0].order();
    g.sigma = sigma;
    g.sigma_inv = jm_inverse(sigma, n, "sigma is degenerate");
    if (kind == MetricInput::Seed) {
        auto [gm, acs] = compatible_triple(sigma, metric, n);
        g.metric = std::move(gm);
        g.acs = std::move(acs);
    } else {
        g.metric = metric;
        // G = J^T sigma  =>  J = (G sigma^{-1})^T
        g.acs = jm_transpose(jm_mul(metric, g.sigma_inv, n), n);
        JetMatrix<S> sq = jm_add(jm_mul(g.acs, g.acs, n), jm_identity<S>(n, n, g.acs[0].order()));
        if (Ops::exact ? !jm_is_zero(sq) : jm_max_abs(sq) > 1e-10) throw ConfigError("chart: metric is not compatible with sigma (J^2 != -1)");
    }
    g.metric_inv = jm_inverse(g.metric, n);
    g.omega = FiberForm<S>::from_metric(n, g.metric_inv, g.sigma_inv);
    g.lc = levi_civita(g.metric, g.metric_inv, n);
    g.nijenhuis = nijenhuis(g.acs, n);
    g.yano = yano(g.lc, g.nijenhuis, g.metric, g.metric_inv, n);
    auto [t, r] = torsion_curvature(g.yano, n);
    g.torsion = std::move(t);
    g.curvature = std::move(r);
    auto [th, rh] = hat_tensors(g.sigma, g.torsion, g.curvature, n, cap);
    g.t_hat = std::move(th);
    g.r_hat = std::move(rh);
    return g;
}

template <class S>
ChartGeometry<S> flat_chart(int dim, int jet_order, int cap)
{
    JetMatrix<S> s = standard_sigma<S>(dim, jet_order);
    JetMatrix<S> g = jm_identity<S>(dim, dim, jet_order);
    return build_chart(s, g, MetricInput::Direct, cap);
}

template <class S>
GradedElement<S> nabla_with(const GradedElement<S>& a, const Rank3<S>& gamma, int out_cap)
{
    const int n = a.dim();
    GradedElement<S> r(n, out_cap);
    const MonomialTable& t = a.ytable();
    for (const auto& [k, f] : a.terms()) {
        if (a.total_degree(k) > out_cap) continue;
        auto key = unpack_key(k);
        const Exps& e = t.exps(key.alpha);
        for (int i = 0; i < n; ++i) {
            if (key.mask & (1u << i)) continue;
            const unsigned mask = key.mask | (1u << i);
            const int sign = (std::popcount(key.mask & ((1u << i) - 1)) & 1) ? -1 : 1;
            Jet<S> df = f.partial(i);
            r.add(key.p, mask, key.alpha, sign > 0 ? df : -df);
            // - f Gamma^l_{ij} y^j d/dy^l y^alpha
            for (int l = 0; l < n; ++l) {
                if (e[l] == 0) continue;
                int low = t.lower(key.alpha, l);
                for (int j = 0; j < n; ++j) {
                    const Jet<S>& gm = gamma[idx3(n, l, i, j)];
                    if (gm.is_zero()) continue;
                    r.add(key.p, mask, t.raise(low, j), (f * gm).scaled(Rational(-sign * int(e[l]))));
                }
            }
        }
    }
    return r;
}

template <class S>
GradedElement<S> nabla(const GradedElement<S>& a, const ChartGeometry<S>& geom, int out_cap)
{
    return nabla_with(a, geom.yano, out_cap);
}

template <class S>
JetMatrix<S> nabla_sigma_residual(const ChartGeometry<S>& g)
{
    const int n = g.dim;
    std::vector<Jet<S>> out(std::size_t(n) * n * n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Jet<S> acc = g.sigma[std::size_t(i) * n + j].partial(k);
                for (int l = 0; l < n; ++l) {
                    acc -= g.yano[idx3(n, l, k, i)] * g.sigma[std::size_t(l) * n + j];
                    acc -= g.yano[idx3(n, l, k, j)] * g.sigma[std::size_t(i) * n + l];
                }
                out[idx3(n, k, i, j)] = acc;
            }
    return out;
}

template <class S>
std::vector<Jet<S>> nabla_metric_residual(const ChartGeometry<S>& g)
{
    const int n = g.dim;
    std::vector<Jet<S>> out(std::size_t(n) * n * n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Jet<S> acc = g.metric[std::size_t(i) * n + j].partial(k);
                for (int l = 0; l < n; ++l) {
                    acc -= g.yano[idx3(n, l, k, i)] * g.metric[std::size_t(l) * n + j];
                    acc -= g.yano[idx3(n, l, k, j)] * g.metric[std::size_t(i) * n + l];
                }
                out[idx3(n, k, i, j)] = acc;
            }
    return out;
}

#define FEDQ_INSTANTIATE_GEOMETRY(S)                                                                                      \
    template JetMatrix<S> standard_sigma<S>(int, int);                                                                    \
    template std::pair<JetMatrix<S>, JetMatrix<S>> compatible_triple(const JetMatrix<S>&, const JetMatrix<S>&, int);      \
    template Rank3<S> levi_civita(const JetMatrix<S>&, const JetMatrix<S>&, int);                                         \
    template Rank3<S> nijenhuis(const JetMatrix<S>&, int);                                                                \
    template Rank3<S> yano(const Rank3<S>&, const Rank3<S>&, const JetMatrix<S>&, const JetMatrix<S>&, int);              \
    template std::pair<Rank3<S>, Rank4<S>> torsion_curvature(const Rank3<S>&, int);                                       \
    template std::pair<GradedElement<S>, GradedElement<S>> hat_tensors(const JetMatrix<S>&, const Rank3<S>&,              \
                                                                        const Rank4<S>&, int, int);                       \
    template ChartGeometry<S> build_chart(const JetMatrix<S>&, const JetMatrix<S>&, MetricInput, int);                    \
    template ChartGeometry<S> flat_chart<S>(int, int, int);                                                               \
    template GradedElement<S> nabla_with(const GradedElement<S>&, const Rank3<S>&, int);                                  \
    template GradedElement<S> nabla(const GradedElement<S>&, const ChartGeometry<S>&, int);                               \
    template JetMatrix<S> nabla_sigma_residual(const ChartGeometry<S>&);                                                  \
    template std::vector<Jet<S>> nabla_metric_residual(const ChartGeometry<S>&);

FEDQ_INSTANTIATE_GEOMETRY(QQi)
FEDQ_INSTANTIATE_GEOMETRY(cplx)

} // namespace fedq
