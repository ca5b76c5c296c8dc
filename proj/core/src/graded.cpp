#include "fedq/graded.hpp"

namespace fedq {

std::vector<SubMonomial> sub_monomials(const MonomialTable& t, int alpha, int k)
{
    std::vector<SubMonomial> out;
    const Exps& a = t.exps(alpha);
    const int n = t.dim();
    Exps g{};
    // Depth-first over variables distributing k among the exponents of alpha.
    auto rec = [&](auto&& self, int var, int left) -> void {
        if (var == n) {
            if (left != 0) return;
            Exps rest{};
            long long w = 1;
            for (int v = 0; v < n; ++v) {
                rest[v] = static_cast<std::uint8_t>(a[v] - g[v]);
                for (int q = 0; q < g[v]; ++q) w *= a[v] - q;
            }
            out.push_back({t.index(g), t.index(rest), w});
            return;
        }
        int hi = std::min<int>(a[var], left);
        for (int e = 0; e <= hi; ++e) {
            g[var] = static_cast<std::uint8_t>(e);
            self(self, var + 1, left - e);
        }
        g[var] = 0;
    };
    rec(rec, 0, k);
    return out;
}

template <class S>
const Jet<S>& FiberForm<S>::contraction(int gamma, int delta) const
{
    const std::uint64_t key = std::uint64_t(gamma) << 32 | std::uint32_t(delta);
    {
        std::lock_guard<std::mutex> lock(cache_->mu);
        auto it = cache_->map.find(key);
        if (it != cache_->map.end()) return *it->second;
    }
    auto val = std::make_unique<Jet<S>>(compute_contraction(gamma, delta));
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto [it, inserted] = cache_->map.emplace(key, std::move(val));
    return *it->second;
}

template <class S>
Jet<S> FiberForm<S>::compute_contraction(int gamma, int delta) const
{
    const MonomialTable& t = MonomialTable::get(dim_);
    const int n = dim_;
    std::array<int, kMaxDim> row{}, col{};
    for (int v = 0; v < n; ++v) {
        row[v] = t.exps(gamma)[v];
        col[v] = t.exps(delta)[v];
    }
    const Jet<S>& w00 = omega_[0];
    Jet<S> total(w00.dim(), w00.order(), valid_order());
    total = total.truncated(valid_order());
    std::vector<int> kmat(std::size_t(n) * n, 0);
    // Enumerate K cell by cell in row-major order, keeping row/column budgets.
    auto rec = [&](auto&& self, int cell) -> void {
        if (cell == n * n) {
            for (int v = 0; v < n; ++v)
                if (row[v] != 0 || col[v] != 0) return;
            Jet<S> term = Jet<S>::constant(w00.dim(), total.order(), ScalarOps<S>::from_int(1));
            long long denom = 1;
            for (int c = 0; c < n * n; ++c) {
                for (int q = 0; q < kmat[c]; ++q) {
                    term = term * omega_[c];
                    denom *= q + 1;
                }
            }
            total += term.scaled(Rational(1, denom));
            return;
        }
        const int i = cell / n, j = cell % n;
        // Last cell of a row must exhaust the row budget.
        int hi = std::min(row[i], col[j]);
        int lo = (j == n - 1) ? row[i] : 0;
        if (i == n - 1) lo = std::max(lo, col[j]);
        for (int e = lo; e <= hi; ++e) {
            kmat[cell] = e;
            row[i] -= e;
            col[j] -= e;
            self(self, cell + 1);
            row[i] += e;
            col[j] += e;
        }
        kmat[cell] = 0;
    };
    rec(rec, 0);
    return total;
}

namespace {

enum class Mode { Full, OverHbar };

// Accumulates sign * (A . B) for single terms into out, where A = f dx^{S1}
// y^alpha hbar^p1 and similarly B. In OverHbar mode the kappa = 0 part is
// skipped and hbar^{kappa-1} is attached.
template <class S>
void term_product(std::uint32_t ka, const Jet<S>& fa, std::uint32_t kb, const Jet<S>& fb, const FiberForm<S>& w, Mode mode,
                  int sign, int cap, GradedElement<S>& out)
{
    const TermKey A = unpack_key(ka), B = unpack_key(kb);
    if (A.mask & B.mask) return;
    const MonomialTable& t = out.ytable();
    const int na = t.degree(A.alpha), nb = t.degree(B.alpha);
    const int shift = mode == Mode::OverHbar ? 1 : 0;
    if (2 * (A.p + B.p) + na + nb - 2 * shift > cap) return;
    const int kmin = shift;
    const int kmax = std::min(na, nb);
    if (kmin > kmax) return;
    const int s = sign * wedge_sign(A.mask, B.mask);
    const unsigned mask = A.mask | B.mask;
    Jet<S> fg = fa * fb;
    if (fg.is_zero()) return;
    for (int k = kmin; k <= kmax; ++k) {
        auto ga = sub_monomials(t, A.alpha, k);
        auto gb = sub_monomials(t, B.alpha, k);
        // Collect sum of weights * contraction per output monomial before
        // multiplying with fg once.
        std::map<int, Jet<S>> acc;
        for (const auto& x : ga)
            for (const auto& y : gb) {
                const Jet<S>& om = w.contraction(x.gamma, y.gamma);
                if (om.is_zero()) continue;
                int mu = t.product(x.rest, y.rest);
                Jet<S> term = om.scaled(Rational(x.weight * y.weight * s));
                auto it = acc.find(mu);
                if (it == acc.end())
                    acc.emplace(mu, std::move(term));
                else
                    it->second += term;
            }
        for (auto& [mu, jet] : acc) out.add(A.p + B.p + k - shift, mask, mu, jet * fg);
    }
}

template <class S>
void check_pair(const GradedElement<S>& a, const GradedElement<S>& b, const FiberForm<S>& w)
{
    if (a.dim() != b.dim() || a.dim() != w.dim()) throw ConfigError("wick product: dimension mismatch");
}

} // namespace

template <class S>
GradedElement<S> wick_mul(const GradedElement<S>& a, const GradedElement<S>& b, const FiberForm<S>& w, int cap)
{
    check_pair(a, b, w);
    GradedElement<S> out(a.dim(), cap);
    for (const auto& [ka, fa] : a.terms())
        for (const auto& [kb, fb] : b.terms()) term_product(ka, fa, kb, fb, w, Mode::Full, 1, cap, out);
    return out;
}

template <class S>
GradedElement<S> graded_commutator(const GradedElement<S>& a, const GradedElement<S>& b, const FiberForm<S>& w, int cap)
{
    check_pair(a, b, w);
    GradedElement<S> out(a.dim(), cap);
    for (const auto& [ka, fa] : a.terms())
        for (const auto& [kb, fb] : b.terms()) {
            int koszul = (form_degree(unpack_key(ka).mask) * form_degree(unpack_key(kb).mask)) & 1 ? -1 : 1;
            term_product(ka, fa, kb, fb, w, Mode::Full, 1, cap, out);
            term_product(kb, fb, ka, fa, w, Mode::Full, -koszul, cap, out);
        }
    return out;
}

template <class S>
GradedElement<S> commutator_over_hbar(const GradedElement<S>& a, const GradedElement<S>& b, const FiberForm<S>& w, int cap)
{
    check_pair(a, b, w);
    GradedElement<S> out(a.dim(), cap);
    for (const auto& [ka, fa] : a.terms())
        for (const auto& [kb, fb] : b.terms()) {
            int koszul = (form_degree(unpack_key(ka).mask) * form_degree(unpack_key(kb).mask)) & 1 ? -1 : 1;
            term_product(ka, fa, kb, fb, w, Mode::OverHbar, 1, cap, out);
            term_product(kb, fb, ka, fa, w, Mode::OverHbar, -koszul, cap, out);
        }
    return out;
}

template <class S>
GradedElement<S> hbar_divide(const GradedElement<S>& a)
{
    for (const auto& [k, f] : a.terms())
        if (unpack_key(k).p == 0 && !f.is_zero()) throw AlgebraError("element not divisible by ℏ");
    GradedElement<S> r(a.dim(), a.cap());
    for (const auto& [k, f] : a.terms()) {
        auto t = unpack_key(k);
        if (t.p > 0) r.add(t.p - 1, t.mask, t.alpha, f);
    }
    return r;
}

template <class S>
GradedElement<S> dagger(const GradedElement<S>& a)
{
    GradedElement<S> r(a.dim(), a.cap());
    for (const auto& [k, f] : a.terms()) r.add_key(k, f.conj());
    return r;
}

template <class S>
GradedElement<S> delta_op(const GradedElement<S>& a)
{
    GradedElement<S> r(a.dim(), a.cap());
    const MonomialTable& t = a.ytable();
    for (const auto& [k, f] : a.terms()) {
        auto key = unpack_key(k);
        for (int i = 0; i < a.dim(); ++i) {
            if (key.mask & (1u << i)) continue;
            int low = t.lower(key.alpha, i);
            if (low < 0) continue;
            int e = t.exps(key.alpha)[i];
            int sign = (std::popcount(key.mask & ((1u << i) - 1)) & 1) ? -1 : 1;
            r.add(key.p, key.mask | (1u << i), low, f.scaled(Rational(sign * e)));
        }
    }
    return r;
}

template <class S>
GradedElement<S> delta_inv_op(const GradedElement<S>& a)
{
    GradedElement<S> r(a.dim(), a.cap());
    const MonomialTable& t = a.ytable();
    for (const auto& [k, f] : a.terms()) {
        auto key = unpack_key(k);
        const int kk = form_degree(key.mask);
        if (kk == 0) continue;
        const int nn = t.degree(key.alpha);
        for (int j = 0; j < a.dim(); ++j) {
            if (!(key.mask & (1u << j))) continue;
            int up = t.raise(key.alpha, j);
            int sign = (std::popcount(key.mask & ((1u << j) - 1)) & 1) ? -1 : 1;
            r.add(key.p, key.mask & ~(1u << j), up, f.scaled(Rational(sign, nn + kk)));
        }
    }
    return r;
}

template <class S>
GradedElement<S> tau_project(const GradedElement<S>& a)
{
    return a.filter([](int, int k, int n) { return k == 0 && n == 0; });
}

template <class S>
GradedElement<S> unit_element(int dim, int cap, int jet_order)
{
    GradedElement<S> r(dim, cap);
    r.add(0, 0u, 0, Jet<S>::constant(dim, jet_order, ScalarOps<S>::from_int(1)));
    return r;
}

template <class S>
GradedElement<S> y_monomial(int dim, int cap, int jet_order, const Exps& e, const S& c)
{
    GradedElement<S> r(dim, cap);
    r.add(0, 0u, e, Jet<S>::constant(dim, jet_order, c));
    return r;
}

template <class S>
GradedElement<S> function_element(const Jet<S>& f, int cap)
{
    GradedElement<S> r(f.dim(), cap);
    r.add(0, 0u, 0, f);
    return r;
}

#define FEDQ_INSTANTIATE_GRADED(S)                                                                                         \
    template class FiberForm<S>;                                                                                           \
    template GradedElement<S> wick_mul(const GradedElement<S>&, const GradedElement<S>&, const FiberForm<S>&, int);        \
    template GradedElement<S> graded_commutator(const GradedElement<S>&, const GradedElement<S>&, const FiberForm<S>&, int); \
    template GradedElement<S> commutator_over_hbar(const GradedElement<S>&, const GradedElement<S>&, const FiberForm<S>&,   \
                                                   int);                                                                   \
    template GradedElement<S> hbar_divide(const GradedElement<S>&);                                                        \
    template GradedElement<S> dagger(const GradedElement<S>&);                                                             \
    template GradedElement<S> delta_op(const GradedElement<S>&);                                                           \
    template GradedElement<S> delta_inv_op(const GradedElement<S>&);                                                       \
    template GradedElement<S> tau_project(const GradedElement<S>&);                                                        \
    template GradedElement<S> unit_element<S>(int, int, int);                                                              \
    template GradedElement<S> y_monomial<S>(int, int, int, const Exps&, const S&);                                         \
    template GradedElement<S> function_element(const Jet<S>&, int);

FEDQ_INSTANTIATE_GRADED(QQi)
FEDQ_INSTANTIATE_GRADED(cplx)

} // namespace fedq
