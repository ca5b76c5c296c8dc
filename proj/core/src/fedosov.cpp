#include "fedq/fedosov.hpp"

namespace fedq {

namespace {

template <class S>
bool negligible(const GradedElement<S>& e)
{
    if constexpr (ScalarOps<S>::exact)
        return e.is_zero();
    else
        return e.max_abs() <= 1e-13;
}

template <class S>
void require_validity(const ChartGeometry<S>& g, int N)
{
    if (N < 2) throw ConfigError("degree cap must be at least 2");
    if (jm_valid(g.metric) < N) throw ValidityError("insufficient jet validity: chart jets must be valid to order >= Deg cap");
}

template <class S>
GradedElement<S> quantize_capped(const Jet<S>& f, const FedosovData<S>& fd, int cap)
{
    const int n = fd.geom.dim;
    if (f.dim() != n) throw ConfigError("quantize: function dimension mismatch");
    if (f.valid_order() < cap) throw ValidityError("quantize: function jet must be valid to order >= Deg cap");
    GradedElement<S> t = function_element(f, cap);
    std::vector<GradedElement<S>> r_parts(cap + 2), t_parts(cap + 1);
    for (int a = 2; a <= cap + 1; ++a) r_parts[a] = fd.r.deg_part(a);
    t_parts[0] = t;
    for (int d = 1; d <= cap; ++d) {
        GradedElement<S> x(n, cap);
        x += nabla(t_parts[d - 1], fd.geom, d - 1);
        for (int a = 2; a <= d; ++a) {
            const int b = d + 1 - a;
            if (r_parts[a].empty() || t_parts[b].empty()) continue;
            x += i_ad(r_parts[a], t_parts[b], fd.geom.omega, d - 1);
        }
        t_parts[d] = delta_inv_op(x);
        t_parts[d].prune();
        t += t_parts[d];
    }
    return t;
}

} // namespace

template <class S>
FedosovData<S> build_r(const ChartGeometry<S>& geom, int N, std::type_identity_t<const GradedElement<S>*> aux_omega,
                       std::type_identity_t<const GradedElement<S>*> aux_s)
{
    require_validity(geom, N);
    const int n = geom.dim;
    FedosovData<S> fd;
    fd.geom = geom;
    fd.cap = N;
    fd.aux_omega = aux_omega ? aux_omega->with_cap(N) : GradedElement<S>(n, N);
    fd.aux_s = aux_s ? aux_s->with_cap(N) : GradedElement<S>(n, N);
    for (const auto& [k, f] : fd.aux_omega.terms()) {
        auto t = unpack_key(k);
        if (t.p < 1 || form_degree(t.mask) != 2 || t.alpha != 0) throw ConfigError("Omega must be a hbar-series of 2-forms starting at hbar^1");
    }
    if (!negligible(nabla(fd.aux_omega, geom))) throw ConfigError("Omega must be closed");
    for (const auto& [k, f] : fd.aux_s.terms()) {
        auto t = unpack_key(k);
        if (form_degree(t.mask) != 0 || fd.aux_s.total_degree(k) < 3) throw ConfigError("s must be a 0-form with Deg >= 3");
    }
    if (!negligible(fd.aux_s - dagger(fd.aux_s))) throw ConfigError("s must be self-adjoint");

    GradedElement<S> src = geom.t_hat.with_cap(N) + geom.r_hat.with_cap(N) + fd.aux_omega;
    std::vector<GradedElement<S>> parts(N + 1);
    fd.r = GradedElement<S>(n, N);
    for (int d = 2; d <= N; ++d) {
        GradedElement<S> x(n, N);
        if (d - 1 >= 2) x += nabla(parts[d - 1], geom, d - 1);
        for (int a = 2; a <= d - 1; ++a) {
            const int b = d + 1 - a;
            if (b < 2 || parts[a].empty() || parts[b].empty()) continue;
            x += i_ad(parts[a], parts[b], geom.omega, d - 1).scaled(Rational(1, 2));
        }
        x -= src.deg_part(d - 1);
        parts[d] = delta_inv_op(x) + delta_op(fd.aux_s.deg_part(d + 1));
        parts[d].prune();
        fd.r += parts[d];
    }
    return fd;
}

template <class S>
GradedElement<S> r_equation_residual(const FedosovData<S>& fd)
{
    const int n = fd.geom.dim, out = fd.cap - 1;
    GradedElement<S> res(n, out);
    res += nabla(fd.r, fd.geom, out);
    res -= delta_op(fd.r);
    res += i_ad(fd.r, fd.r, fd.geom.omega, out).scaled(Rational(1, 2));
    res -= fd.geom.r_hat.with_cap(out);
    res -= fd.geom.t_hat.with_cap(out);
    res -= fd.aux_omega.with_cap(out);
    res.prune();
    return res;
}

template <class S>
GradedElement<S> apply_D_with(const ChartGeometry<S>& geom, const GradedElement<S>& r, const GradedElement<S>& a, int out_cap)
{
    GradedElement<S> out(a.dim(), out_cap);
    out += nabla(a, geom, out_cap);
    out -= delta_op(a.deg_range(0, out_cap + 1));
    out += i_ad(r, a, geom.omega, out_cap);
    out.prune();
    return out;
}

template <class S>
GradedElement<S> apply_D(const FedosovData<S>& fd, const GradedElement<S>& a, int out_cap)
{
    return apply_D_with(fd.geom, fd.r, a, out_cap);
}

template <class S>
GradedElement<S> quantize(const Jet<S>& f, const FedosovData<S>& fd)
{
    return quantize_capped(f, fd, fd.cap);
}

template <class S>
GradedElement<S> quantize_series(const HbarSeries<S>& f, const FedosovData<S>& fd)
{
    GradedElement<S> t(fd.geom.dim, fd.cap);
    for (int k = 0; k < int(f.size()) && 2 * k <= fd.cap; ++k) {
        if (f[k].is_zero()) continue;
        t += quantize_capped(f[k], fd, fd.cap - 2 * k).with_cap(fd.cap).hbar_shift(k);
    }
    return t;
}

template <class S>
HbarSeries<S> tau_series(const GradedElement<S>& t, int max_power)
{
    std::map<int, Jet<S>> got;
    int order = 0;
    for (const auto& [k, f] : t.terms()) {
        auto key = unpack_key(k);
        if (key.mask != 0 || key.alpha != 0 || key.p > max_power) continue;
        order = std::max(order, f.order());
        auto it = got.find(key.p);
        if (it == got.end())
            got.emplace(key.p, f);
        else
            it->second += f;
    }
    HbarSeries<S> out;
    for (int p = 0; p <= max_power; ++p) {
        auto it = got.find(p);
        out.push_back(it != got.end() ? it->second : Jet<S>(t.dim(), order));
    }
    return out;
}

template <class S>
HbarSeries<S> star(const Jet<S>& f, const Jet<S>& h, const FedosovData<S>& fd)
{
    return star_series(HbarSeries<S>{f}, HbarSeries<S>{h}, fd);
}

template <class S>
HbarSeries<S> star_series(const HbarSeries<S>& f, const HbarSeries<S>& h, const FedosovData<S>& fd)
{
    GradedElement<S> tf = quantize_series(f, fd), th = quantize_series(h, fd);
    return tau_series(wick_mul(tf, th, fd.geom.omega, fd.cap), fd.cap / 2);
}

template <class S>
GradedElement<S> alpha_map(const GradedElement<S>& a, const FiberForm<S>& w, const FiberForm<S>& wp)
{
    const int n = a.dim();
    if (w.dim() != n || wp.dim() != n) throw ConfigError("alpha: dimension or cap mismatch");
    const MonomialTable& t = a.ytable();
    JetMatrix<S> diff(std::size_t(n) * n);
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = (wp.omega()[k] - w.omega()[k]).scaled(Rational(1, 2));
    // L = (1/2) (w' - w)^{ij} d_i d_j with hbar attached.
    auto lap = [&](const GradedElement<S>& x) {
        GradedElement<S> out(n, x.cap());
        for (const auto& [k, f] : x.terms()) {
            auto key = unpack_key(k);
            const Exps& e = t.exps(key.alpha);
            for (int i = 0; i < n; ++i) {
                if (e[i] == 0) continue;
                const int li = t.lower(key.alpha, i);
                const Exps& ei = t.exps(li);
                for (int j = 0; j < n; ++j) {
                    if (ei[j] == 0) continue;
                    const Jet<S>& dij = diff[std::size_t(i) * n + j];
                    if (dij.is_zero()) continue;
                    out.add(key.p + 1, key.mask, t.lower(li, j), (f * dij).scaled(Rational(int(e[i]) * int(ei[j]))));
                }
            }
        }
        return out;
    };
    GradedElement<S> out = a, cur = a;
    for (int k = 1;; ++k) {
        cur = lap(cur).scaled(Rational(1, k));
        cur.prune();
        if (cur.empty()) break;
        out += cur;
    }
    return out;
}

template <class S>
GradedElement<S> c_tensor(const ChartGeometry<S>& g, const ChartGeometry<S>& gp, int cap)
{
    const int n = g.dim;
    if (gp.dim != n) throw ConfigError("charts disagree on dimension");
    JetMatrix<S> ds = jm_add(g.sigma, gp.sigma, ScalarOps<S>::from_int(-1));
    if (ScalarOps<S>::exact ? !jm_is_zero(ds) : jm_max_abs(ds) > 1e-12) throw ConfigError("charts disagree on sigma");
    const MonomialTable& t = MonomialTable::get(n);
    GradedElement<S> c(n, cap);
    for (int i = 0; i < n; ++i)
        for (int j1 = 0; j1 < n; ++j1)
            for (int j2 = 0; j2 < n; ++j2) {
                Jet<S> acc;
                bool any = false;
                for (int l = 0; l < n; ++l) {
                    const Jet<S>& s = g.sigma[std::size_t(j1) * n + l];
                    if (s.is_zero()) continue;
                    Jet<S> term = s * (gp.yano[idx3(n, l, i, j2)] - g.yano[idx3(n, l, i, j2)]);
                    acc = any ? acc + term : term;
                    any = true;
                }
                if (any) c.add(0, 1u << i, t.raise(t.raise(0, j1), j2), acc.scaled(Rational(1, 2)));
            }
    c.prune();
    return c;
}

std::vector<Rational> n_coeffs(int max_order)
{
    std::vector<Rational> n{Rational(1)};
    std::vector<Rational> inv_fact{Rational(1)};
    for (int k = 1; k <= max_order + 1; ++k) inv_fact.push_back(inv_fact.back() / Rational(k));
    for (int lam = 1; lam <= max_order; ++lam) {
        Rational acc;
        for (int lp = 1; lp <= lam; ++lp) acc += inv_fact[lp + 1] * n[lam - lp];
        n.push_back(-acc);
    }
    return n;
}

template <class S>
GradedElement<S> exp_ad(const GradedElement<S>& h, const GradedElement<S>& t, const FiberForm<S>& w, int s)
{
    GradedElement<S> out = t, cur = t;
    for (int k = 1;; ++k) {
        cur = i_ad(h, cur, w, t.cap()).scaled(Rational(s, k));
        cur.prune();
        if (cur.empty()) break;
        out += cur;
    }
    return out;
}

template <class S>
GradedElement<S> alpha_curvature(const FedosovData<S>& fd, const FedosovData<S>& fdp, const GradedElement<S>& c)
{
    const int cap = fd.cap;
    GradedElement<S> om = alpha_map(fdp.geom.r_hat.with_cap(cap), fdp.geom.omega, fd.geom.omega);
    om -= fd.geom.r_hat.with_cap(cap);
    om -= nabla(c, fd.geom, cap);
    om += i_ad(c, c, fd.geom.omega, cap).scaled(Rational(1, 2));
    om += fdp.aux_omega;
    om.prune();
    return om;
}

template <class S>
GradedElement<S> form_primitive(const GradedElement<S>& beta)
{
    const int n = beta.dim();
    GradedElement<S> out(n, beta.cap());
    for (const auto& [k, f] : beta.terms()) {
        const auto key = unpack_key(k);
        if (key.alpha != 0) throw AlgebraError("form_primitive: scalar forms only");
        const int deg = form_degree(key.mask);
        if (deg == 0) continue;
        const int order = std::min(f.order() + 1, kMaxOrder);
        const int valid = std::min(f.valid_order() + 1, order);
        const MonomialTable& t = f.table();
        for (int i = 0; i < n; ++i) {
            if (!(key.mask & (1u << i))) continue;
            const int sign = (std::popcount(key.mask & ((1u << i) - 1)) & 1) ? -1 : 1;
            Jet<S> g(n, order, valid);
            for (int a = 0; a < t.count(valid - 1); ++a) {
                const S& c = f.raw(a);
                if (ScalarOps<S>::is_zero(c)) continue;
                g.coeff_mut(t.raise(a, i)) = ScalarOps<S>::scale(c, Rational(sign, t.degree(a) + deg));
            }
            out.add(key.p, key.mask & ~(1u << i), 0, g);
        }
    }
    out.prune();
    return out;
}

template <class S>
GaugePair<S> build_gauge(const FedosovData<S>& fd, const FedosovData<S>& fdp, std::type_identity_t<const GradedElement<S>*> theta)
{
    if (fd.cap != fdp.cap) throw ConfigError("gauge pair: Deg caps differ");
    const int n = fd.geom.dim, N = fd.cap;
    GaugePair<S> gp;
    gp.fd = fd;
    gp.fdp = fdp;
    gp.c = c_tensor(fd.geom, fdp.geom, N);
    gp.r_alpha = alpha_map(fdp.r, fdp.geom.omega, fd.geom.omega) - gp.c;
    gp.r_alpha.prune();
    gp.theta = theta ? theta->with_cap(N) : GradedElement<S>(n, N);
    for (const auto& [k, f] : gp.theta.terms()) {
        auto t = unpack_key(k);
        if (t.p < 1 || form_degree(t.mask) != 1 || t.alpha != 0) throw ConfigError("theta must be a hbar-series of 1-forms starting at hbar^1");
    }
    if (!negligible(nabla(gp.theta, fd.geom))) throw ConfigError("θ must be closed");
    gp.n = n_coeffs(N);
    gp.omega_alpha = alpha_curvature(fd, fdp, gp.c);
    gp.theta0 = form_primitive((fd.aux_omega - gp.omega_alpha).filter([](int, int, int nn) { return nn == 0; }));
    const GradedElement<S> theta_all = (gp.theta + gp.theta0).with_cap(N - 1);

    const GradedElement<S> diff = (gp.r_alpha - fd.r).with_cap(N - 1);
    const FiberForm<S>& w = fd.geom.omega;
    gp.h = GradedElement<S>(n, N);
    for (int it = 0; it <= N; ++it) {
        GradedElement<S> x(n, N);
        x += nabla(gp.h, fd.geom, N - 1);
        x += i_ad(gp.r_alpha, gp.h, w, N - 1);
        x -= theta_all;
        GradedElement<S> cur = diff;
        for (int lam = 0; lam < int(gp.n.size()); ++lam) {
            if (lam > 0) cur = i_ad(gp.h, cur, w, N - 1);
            cur.prune();
            if (cur.empty()) break;
            x -= cur.scaled(gp.n[lam]);
        }
        GradedElement<S> next = delta_inv_op(x);
        next.prune();
        const bool same = negligible(next - gp.h);
        gp.h = std::move(next);
        if (same) break;
    }
    return gp;
}

template <class S>
GradedElement<S> gauge_residual(const GaugePair<S>& gp, int out_cap)
{
    const FiberForm<S>& w = gp.fd.geom.omega;
    GradedElement<S> dh = apply_D_with(gp.fd.geom, gp.r_alpha, gp.h, out_cap);
    GradedElement<S> res(gp.fd.geom.dim, out_cap);
    res += gp.fd.r.with_cap(out_cap);
    res -= gp.r_alpha.with_cap(out_cap);
    res -= gp.theta.with_cap(out_cap);
    res -= gp.theta0.with_cap(out_cap);
    GradedElement<S> cur = dh;
    for (int k = 0;; ++k) {
        if (k > 0) cur = i_ad(gp.h, cur, w, out_cap).scaled(Rational(1, k + 1));
        cur.prune();
        if (cur.empty()) break;
        res += cur;
    }
    res.prune();
    return res;
}

template <class S>
HbarSeries<S> equivalence_B(const HbarSeries<S>& f, const GaugePair<S>& gp)
{
    GradedElement<S> t = quantize_series(f, gp.fd);
    GradedElement<S> u = exp_ad(gp.h, t, gp.fd.geom.omega, -1);
    return tau_series(alpha_map(u, gp.fd.geom.omega, gp.fdp.geom.omega), gp.fd.cap / 2);
}

#define FEDQ_INSTANTIATE_FEDOSOV(S)                                                                                       \
    template FedosovData<S> build_r(const ChartGeometry<S>&, int, const GradedElement<S>*, const GradedElement<S>*);      \
    template GradedElement<S> r_equation_residual(const FedosovData<S>&);                                                 \
    template GradedElement<S> apply_D(const FedosovData<S>&, const GradedElement<S>&, int);                               \
    template GradedElement<S> apply_D_with(const ChartGeometry<S>&, const GradedElement<S>&, const GradedElement<S>&, int); \
    template GradedElement<S> quantize(const Jet<S>&, const FedosovData<S>&);                                             \
    template GradedElement<S> quantize_series(const HbarSeries<S>&, const FedosovData<S>&);                               \
    template HbarSeries<S> tau_series(const GradedElement<S>&, int);                                                      \
    template HbarSeries<S> star(const Jet<S>&, const Jet<S>&, const FedosovData<S>&);                                     \
    template HbarSeries<S> star_series(const HbarSeries<S>&, const HbarSeries<S>&, const FedosovData<S>&);                \
    template GradedElement<S> alpha_map(const GradedElement<S>&, const FiberForm<S>&, const FiberForm<S>&);               \
    template GradedElement<S> c_tensor(const ChartGeometry<S>&, const ChartGeometry<S>&, int);                            \
    template GradedElement<S> exp_ad(const GradedElement<S>&, const GradedElement<S>&, const FiberForm<S>&, int);         \
    template GradedElement<S> alpha_curvature(const FedosovData<S>&, const FedosovData<S>&, const GradedElement<S>&);      \
    template GradedElement<S> form_primitive(const GradedElement<S>&);                                                    \
    template GaugePair<S> build_gauge(const FedosovData<S>&, const FedosovData<S>&, const GradedElement<S>*);             \
    template GradedElement<S> gauge_residual(const GaugePair<S>&, int);                                                   \
    template HbarSeries<S> equivalence_B(const HbarSeries<S>&, const GaugePair<S>&);

FEDQ_INSTANTIATE_FEDOSOV(QQi)
FEDQ_INSTANTIATE_FEDOSOV(cplx)

} // namespace fedq
