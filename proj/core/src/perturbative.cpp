#include "fedq/perturbative.hpp"

#include "fedq/errors.hpp"

#include <cmath>

namespace fedq {

namespace {

const cplx kI{0.0, 1.0};

double binom(int n, int k)
{
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

double factorial(int k) { return std::tgamma(k + 1.0); }

void check_background(const LatticeWickElement& a, const LatticeWickElement& b)
{
    if (a.sites != b.sites || a.phi.size() != b.phi.size() || (a.phi.size() > 0 && a.phi != b.phi))
        throw ConfigError("background mismatch");
}

WickComponent& slot(LatticeWickElement& e, int p, int n)
{
    auto it = e.comps.find({p, n});
    if (it != e.comps.end()) return it->second;
    WickComponent c;
    if (n == 1 || n >= 3) c.vec = CVec::Zero(e.sites);
    if (n == 2) c.mat = CMat::Zero(e.sites, e.sites);
    return e.comps.emplace(std::make_pair(p, n), std::move(c)).first->second;
}

// Elementwise powers of Omega, built on demand.
class Powers {
public:
    explicit Powers(const CMat& base) : base_(base) {}
    const CMat& get(int k)
    {
        while (static_cast<int>(p_.size()) < k) p_.push_back(p_.empty() ? base_ : CMat(p_.back().cwiseProduct(base_)));
        return p_[k - 1];
    }

private:
    const CMat& base_;
    std::vector<CMat> p_;
};

bool is_local(int n) { return n == 1 || n >= 3; }

// Contraction of two site-local components g :phi_y^n: and h :phi_z^m: through a kernel K_k(y, z).
template <class KernelFn>
void local_pair(LatticeWickElement& out, int p0, int n, const CVec& g, int m, const CVec& h, int kmin, KernelFn kernel,
                cplx pref)
{
    for (int k = kmin; k <= std::min(n, m); ++k) {
        const int r1 = n - k, r2 = m - k;
        const int p = p0 + k;
        if (2 * p + r1 + r2 > out.cap) continue;
        const cplx kap = pref * factorial(k) * binom(n, k) * binom(m, k);
        if (k == 0) {
            if (r1 == 1 && r2 == 1) out.add_matrix(p, kap * g * h.transpose());
            else out.lossy = true;
            continue;
        }
        const CMat& K = kernel(k);
        if (r1 == 0 && r2 == 0) out.add_scalar(p, kap * (g.transpose() * K * h)(0, 0));
        else if (r1 == 0) out.add_local(p, r2, kap * (K.transpose() * g).cwiseProduct(h));
        else if (r2 == 0) out.add_local(p, r1, kap * g.cwiseProduct(K * h));
        else if (r1 == 1 && r2 == 1) out.add_matrix(p, kap * (g.asDiagonal() * K * h.asDiagonal()));
        else out.lossy = true;
    }
}

void mul_into(LatticeWickElement& out, const LatticeWickElement& a, const LatticeWickElement& b, const CMat& omega,
              bool skip0)
{
    Powers pw(omega);
    auto kern = [&](int k) -> const CMat& { return pw.get(k); };
    const int kmin = skip0 ? 1 : 0;
    for (const auto& [ka, ca] : a.comps) {
        const auto [pa, na] = ka;
        for (const auto& [kb, cb] : b.comps) {
            const auto [pb, nb] = kb;
            const int p0 = pa + pb;
            if (na == 0 || nb == 0) {
                if (skip0 || 2 * p0 + na + nb > out.cap) continue;
                const cplx s = na == 0 ? ca.scalar : cb.scalar;
                const WickComponent& o = na == 0 ? cb : ca;
                const int n = na + nb;
                if (n == 0) out.add_scalar(p0, ca.scalar * cb.scalar);
                else if (n == 2) out.add_matrix(p0, s * o.mat);
                else out.add_local(p0, n, s * o.vec);
                continue;
            }
            if (is_local(na) && is_local(nb)) {
                local_pair(out, p0, na, ca.vec, nb, cb.vec, kmin, kern, 1.0);
                continue;
            }
            if (is_local(na) && nb == 2) {
                if (!skip0) out.lossy = true;
                if (na == 1 && 2 * (p0 + 1) + 1 <= out.cap) out.add_vector(p0 + 1, 2.0 * (cb.mat * (omega.transpose() * ca.vec)));
                else if (na >= 3) out.lossy = true;
                if (na >= 3 && 2 * (p0 + 2) + na - 2 <= out.cap) {
                    const CVec d = (omega * cb.mat).cwiseProduct(omega).rowwise().sum();
                    out.add_local(p0 + 2, na - 2, double(na * (na - 1)) * ca.vec.cwiseProduct(d));
                }
                continue;
            }
            if (na == 2 && is_local(nb)) {
                if (!skip0) out.lossy = true;
                if (nb == 1 && 2 * (p0 + 1) + 1 <= out.cap) out.add_vector(p0 + 1, 2.0 * (ca.mat * (omega * cb.vec)));
                else if (nb >= 3) out.lossy = true;
                if (nb >= 3 && 2 * (p0 + 2) + nb - 2 <= out.cap) {
                    const CVec d = (ca.mat * omega).cwiseProduct(omega).colwise().sum().transpose();
                    out.add_local(p0 + 2, nb - 2, double(nb * (nb - 1)) * cb.vec.cwiseProduct(d));
                }
                continue;
            }
            // rank 2 x rank 2
            if (!skip0) out.lossy = true;
            if (2 * (p0 + 1) + 2 <= out.cap) out.add_matrix(p0 + 1, 4.0 * (ca.mat * omega * cb.mat));
            if (2 * (p0 + 2) <= out.cap) out.add_scalar(p0 + 2, 2.0 * ca.mat.cwiseProduct(omega * cb.mat * omega.transpose()).sum());
        }
    }
}

} // namespace

LatticeWickElement::LatticeWickElement(FieldHistory background, int cap_)
    : phi(std::move(background)), sites(static_cast<int>(phi.size())), cap(cap_)
{
}

LatticeWickElement LatticeWickElement::unit(const FieldHistory& background, int cap)
{
    LatticeWickElement e(background, cap);
    e.add_scalar(0, 1.0);
    return e;
}

void LatticeWickElement::add_scalar(int p, cplx v)
{
    if (2 * p > cap) return;
    slot(*this, p, 0).scalar += v;
}

void LatticeWickElement::add_vector(int p, const CVec& c)
{
    if (2 * p + 1 > cap) return;
    if (c.size() != sites) throw ConfigError("vector component has the wrong size");
    slot(*this, p, 1).vec += c;
}

void LatticeWickElement::add_matrix(int p, const CMat& s)
{
    if (2 * p + 2 > cap) return;
    if (s.rows() != sites || s.cols() != sites) throw ConfigError("matrix component has the wrong size");
    slot(*this, p, 2).mat += 0.5 * (s + s.transpose());
}

void LatticeWickElement::add_local(int p, int n, const CVec& g)
{
    if (2 * p + n > cap) return;
    if (g.size() != sites) throw ConfigError("local component has the wrong size");
    if (n == 0) add_scalar(p, g.sum());
    else if (n == 1) add_vector(p, g);
    else if (n == 2) add_matrix(p, CMat(g.asDiagonal()));
    else slot(*this, p, n).vec += g;
}

LatticeWickElement LatticeWickElement::scaled(cplx s) const
{
    LatticeWickElement r = *this;
    for (auto& [k, c] : r.comps) {
        c.scalar *= s;
        if (c.vec.size()) c.vec *= s;
        if (c.mat.size()) c.mat *= s;
    }
    return r;
}

LatticeWickElement LatticeWickElement::truncated(int n_max, int p_max) const
{
    LatticeWickElement r(phi, cap);
    r.sites = sites;
    r.lossy = lossy;
    for (const auto& [k, c] : comps)
        if (k.first <= p_max && k.second <= n_max) r.comps.emplace(k, c);
    return r;
}

double LatticeWickElement::max_abs() const
{
    double m = 0;
    for (const auto& [k, c] : comps) {
        m = std::max(m, std::abs(c.scalar));
        if (c.vec.size()) m = std::max(m, c.vec.cwiseAbs().maxCoeff());
        if (c.mat.size()) m = std::max(m, c.mat.cwiseAbs().maxCoeff());
    }
    return m;
}

LatticeWickElement operator+(const LatticeWickElement& a, const LatticeWickElement& b)
{
    check_background(a, b);
    LatticeWickElement r = a;
    r.cap = std::min(a.cap, b.cap);
    r.lossy = a.lossy || b.lossy;
    for (const auto& [k, c] : b.comps) {
        WickComponent& s = slot(r, k.first, k.second);
        s.scalar += c.scalar;
        if (c.vec.size()) s.vec += c.vec;
        if (c.mat.size()) s.mat += c.mat;
    }
    return r;
}

LatticeWickElement operator-(const LatticeWickElement& a, const LatticeWickElement& b) { return a + b.scaled(-1.0); }

LatticeWickElement wick_mul_lattice(const LatticeWickElement& a, const LatticeWickElement& b, const CMat& omega)
{
    check_background(a, b);
    if (a.lossy || b.lossy) throw AlgebraError("wick_mul_lattice: operand has dropped components");
    if (omega.rows() != a.sites || omega.cols() != a.sites) throw ConfigError("two-point matrix has the wrong size");
    LatticeWickElement out(a.phi, std::min(a.cap, b.cap));
    out.sites = a.sites;
    mul_into(out, a, b, omega, false);
    return out;
}

LatticeWickElement wick_commutator(const LatticeWickElement& a, const LatticeWickElement& b, const CMat& omega)
{
    check_background(a, b);
    if (a.lossy || b.lossy) throw AlgebraError("wick_commutator: operand has dropped components");
    LatticeWickElement ab(a.phi, std::min(a.cap, b.cap)), ba(a.phi, std::min(a.cap, b.cap));
    ab.sites = ba.sites = a.sites;
    // zero-contraction terms cancel between the two orders
    mul_into(ab, a, b, omega, true);
    mul_into(ba, b, a, omega, true);
    return ab - ba;
}

LatticeWickElement times_i_over_hbar(const LatticeWickElement& a)
{
    LatticeWickElement r(a.phi, a.cap);
    r.sites = a.sites;
    r.lossy = a.lossy;
    for (const auto& [k, c] : a.comps) {
        if (k.first == 0) {
            const bool zero = std::abs(c.scalar) == 0 && (c.vec.size() == 0 || c.vec.isZero(0)) &&
                              (c.mat.size() == 0 || c.mat.isZero(0));
            if (!zero) throw AlgebraError("times_i_over_hbar: hbar^0 component present");
            continue;
        }
        WickComponent w = c;
        w.scalar *= kI;
        if (w.vec.size()) w.vec *= kI;
        if (w.mat.size()) w.mat *= kI;
        r.comps[{k.first - 1, k.second}] = std::move(w);
    }
    return r;
}

LatticeWickElement field_derivative(const LatticeWickElement& a, const FieldHistory& u)
{
    if (u.size() != a.sites) throw ConfigError("field_derivative: direction has the wrong size");
    const CVec cu = u.cast<cplx>();
    LatticeWickElement r(a.phi, a.cap);
    r.sites = a.sites;
    r.lossy = a.lossy;
    for (const auto& [k, c] : a.comps) {
        const auto [p, n] = k;
        if (n == 0) continue;
        if (n == 1) r.add_scalar(p, (c.vec.transpose() * cu)(0, 0));
        else if (n == 2) r.add_vector(p, 2.0 * (c.mat * cu));
        else r.add_local(p, n - 1, double(n) * c.vec.cwiseProduct(cu));
    }
    return r;
}

ReducedForm reduce(const LatticeWickElement& a, const Mat& T, int max_rank)
{
    if (T.rows() != a.sites) throw ConfigError("reduce: transfer matrix has the wrong size");
    ReducedForm rf;
    rf.dim = static_cast<int>(T.cols());
    const int d = rf.dim;
    const CMat Tc = T.cast<cplx>();
    for (const auto& [k, c] : a.comps) {
        const int n = k.second;
        if (n > max_rank) continue;
        std::vector<cplx> out;
        if (n == 0) out = {c.scalar};
        else if (n == 1) {
            const CVec r = Tc.transpose() * c.vec;
            out.assign(r.data(), r.data() + d);
        } else if (n == 2) {
            const CMat r = Tc.transpose() * c.mat * Tc;
            out.resize(std::size_t(d) * d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) out[std::size_t(i) * d + j] = r(i, j);
        } else {
            std::size_t size = 1;
            for (int i = 0; i < n; ++i) size *= d;
            out.assign(size, cplx{});
            std::vector<cplx> pw;
            for (int y = 0; y < a.sites; ++y) {
                if (c.vec[y] == cplx{}) continue;
                pw.assign(1, c.vec[y]);
                for (int s = 0; s < n; ++s) {
                    std::vector<cplx> nx(pw.size() * d);
                    for (std::size_t i = 0; i < pw.size(); ++i)
                        for (int j = 0; j < d; ++j) nx[i * d + j] = pw[i] * T(y, j);
                    pw.swap(nx);
                }
                for (std::size_t i = 0; i < size; ++i) out[i] += pw[i];
            }
        }
        rf.comps[k] = std::move(out);
    }
    return rf;
}

double equiv_compare(const LatticeModel& model, const LatticeWickElement& a, const LatticeWickElement& b, int max_rank)
{
    check_background(a, b);
    const Mat T = transfer(model, a.phi.size() ? a.phi : FieldHistory(Vec::Zero(model.sites())));
    const ReducedForm ra = reduce(a, T, max_rank), rb = reduce(b, T, max_rank);
    double m = 0;
    auto scan = [&](const ReducedForm& x, const ReducedForm& y) {
        for (const auto& [k, v] : x.comps) {
            auto it = y.comps.find(k);
            for (std::size_t i = 0; i < v.size(); ++i)
                m = std::max(m, std::abs(v[i] - (it == y.comps.end() ? cplx{} : it->second[i])));
        }
    };
    scan(ra, rb);
    scan(rb, ra);
    return m;
}

Mat solution_projection(const LatticeModel& model, const FieldHistory& phi)
{
    return sigma_c_matrix(model, early_cutoff(model)) * propagators(model, phi).E;
}

LatticeWickElement map_slots(const LatticeWickElement& a, const Mat& A, const FieldHistory& target)
{
    if (A.rows() != a.sites || A.cols() != a.sites) throw ConfigError("map_slots: coefficient map has the wrong size");
    LatticeWickElement r(target, a.cap);
    r.sites = a.sites;
    r.lossy = a.lossy;
    const CMat Ac = A.cast<cplx>();
    for (const auto& [k, c] : a.comps) {
        const auto [p, n] = k;
        if (n == 0) r.add_scalar(p, c.scalar);
        else if (n == 1) r.add_vector(p, Ac * c.vec);
        else if (n == 2) r.add_matrix(p, Ac * c.mat * Ac.transpose());
        else if (!c.vec.isZero(0)) r.lossy = true;
    }
    return r;
}

RetardedMap alpha_R(const LatticeModel& model, const FieldHistory& phi, const FieldHistory& phi_prime)
{
    const int M = model.M;
    RetardedMap m;
    m.phi = phi;
    m.phi_prime = phi_prime;
    Mat B = Mat::Zero(2 * M, model.sites());
    for (int x = 0; x < M; ++x) {
        B(x, x) = 1;
        B(M + x, x) = -1 / model.dt;
        B(M + x, M + x) = 1 / model.dt;
    }
    m.AR = transfer(model, phi_prime) * B;
    m.A = solution_projection(model, phi);
    return m;
}

LatticeWickElement apply(const RetardedMap& alpha, const LatticeWickElement& a)
{
    if (a.phi.size() != alpha.phi.size() || (a.phi.size() > 0 && a.phi != alpha.phi)) throw ConfigError("background mismatch");
    return map_slots(a, alpha.A, alpha.phi_prime);
}

LocalPoly expand(const LatticeModel& model, const LocalFunctional& F, const FieldHistory& phi)
{
    const int n = model.sites();
    const Vec bg = phi.size() ? phi : Vec(Vec::Zero(n));
    if (bg.size() != n) throw ConfigError("background has the wrong size");
    LocalPoly out;
    for (const LocalTerm& t : F) {
        if (t.power < 0 || t.power > 4) throw ConfigError("local functional powers must lie in [0, 4]");
        if (t.weight.size() != n) throw ConfigError("local functional weight has the wrong size");
        for (int j = 0; j <= t.power; ++j) {
            CVec g(n);
            for (int x = 0; x < n; ++x) g[x] = model.w() * t.weight[x] * binom(t.power, j) * std::pow(bg[x], t.power - j);
            auto it = out.g.find(j);
            if (it == out.g.end()) out.g.emplace(j, g);
            else it->second += g;
        }
    }
    return out;
}

LocalPoly interaction_part(const LatticeModel& model, const FieldHistory& phi)
{
    const int n = model.sites();
    const Vec bg = phi.size() ? phi : Vec(Vec::Zero(n));
    LocalPoly out;
    const Vec wl = model.w() * model.lam;
    out.g[3] = (wl.array() * bg.array() / 6.0).matrix().cast<cplx>();
    out.g[4] = (wl / 24.0).cast<cplx>();
    return out;
}

LatticeWickElement to_element(const LocalPoly& F, const FieldHistory& phi, int cap)
{
    LatticeWickElement e(phi, cap);
    for (const auto& [n, g] : F.g) e.add_local(0, n, g);
    return e;
}

LatticeWickElement retarded_product_1(const LatticeModel& model, const FieldHistory& phi, const LocalPoly& F,
                                      const LocalPoly& V, int order)
{
    if (order != 1) throw ConfigError("higher orders out of scope");
    const int n = model.sites(), M = model.M;
    const FieldHistory bg = phi.size() ? phi : FieldHistory(Vec::Zero(n));
    const CMat omega = retarded_state(model, bg);
    std::vector<CMat> kern;
    auto kernel = [&](int k) -> const CMat& {
        while (static_cast<int>(kern.size()) < k) {
            const int kk = static_cast<int>(kern.size()) + 1;
            CMat K(n, n);
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y) {
                    const double th = theta_step(x / M, y / M);
                    K(x, y) = th == 0 ? cplx{} : th * (std::pow(omega(x, y), kk) - std::pow(omega(y, x), kk));
                }
            kern.push_back(std::move(K));
        }
        return kern[k - 1];
    };
    LatticeWickElement out(bg, 6);
    for (const auto& [j, gf] : F.g) {
        if (j == 0) continue;
        for (const auto& [l, gv] : V.g) {
            if (l == 0) continue;
            local_pair(out, 0, j, gf, l, gv, 1, kernel, 1.0);
        }
    }
    return times_i_over_hbar(out);
}

HaagParts haag_parts(const LatticeModel& model, const FieldHistory& phi, const LocalFunctional& F, int order)
{
    if (order < 0 || order > 1) throw ConfigError("higher orders out of scope");
    const FieldHistory bg = phi.size() ? phi : FieldHistory(Vec::Zero(model.sites()));
    const LocalPoly Fp = expand(model, F, bg);
    HaagParts h;
    h.order0 = to_element(Fp, bg);
    h.order1 = LatticeWickElement(bg, h.order0.cap);
    if (order == 1) h.order1 = retarded_product_1(model, bg, Fp, interaction_part(model, bg));
    return h;
}

LatticeWickElement haag_series(const LatticeModel& model, const FieldHistory& phi, const LocalFunctional& F, int order)
{
    return haag_parts(model, phi, F, order).sum();
}

ConnectionResult retarded_connection(const LatticeModel& model, const FieldHistory& phi, const FieldHistory& u,
                                     const Section& t, double tol)
{
    const auto [q, p] = cauchy_data(model, phi, 0);
    const auto [dq, dp] = cauchy_data(model, u, 0);
    const double size = std::max(dq.cwiseAbs().maxCoeff(), dp.cwiseAbs().maxCoeff());
    ConnectionResult res;
    if (size == 0) {
        res.value = LatticeWickElement(phi, 6);
        return res;
    }
    const double eps0 = 1e-2 / size;
    auto eval = [&](double e) {
        const FieldHistory pe = solve_nonlinear(model, q + e * dq, p + e * dp);
        return map_slots(t(pe), solution_projection(model, pe), phi);
    };
    auto diff = [&](double e) { return (eval(e) - eval(-e)).scaled(1 / (2 * e)); };
    const LatticeWickElement d1 = diff(eps0), d2 = diff(eps0 / 2), d3 = diff(eps0 / 4);
    const LatticeWickElement r1 = (d2.scaled(4.0) - d1).scaled(1.0 / 3), r2 = (d3.scaled(4.0) - d2).scaled(1.0 / 3);
    res.value = (r2.scaled(16.0) - r1).scaled(1.0 / 15);
    res.error_estimate = (res.value - r2).max_abs();
    if (res.error_estimate > tol)
        throw StabilityError("retarded_connection: finite-difference error estimate " + std::to_string(res.error_estimate) +
                             " exceeds tolerance " + std::to_string(tol));
    return res;
}

double check_fedosov_per(const LatticeModel& model, const FieldHistory& phi, const FieldHistory& u,
                         const LocalFunctional& F)
{
    const Section sec = [&](const FieldHistory& bg) { return haag_series(model, bg, F, 1); };
    const ConnectionResult nab = retarded_connection(model, phi, u, sec);
    const LatticeWickElement vert = field_derivative(haag_series(model, phi, F, 1), u);
    const LatticeWickElement diff = (nab.value - vert).truncated(2, 1);
    return equiv_compare(model, diff, LatticeWickElement(phi, diff.cap), 2);
}

double causality_residual(const LatticeModel& model, const FieldHistory& phi, const LocalFunctional& F1,
                          const LocalFunctional& F2)
{
    const HaagParts a = haag_parts(model, phi, F1, 1), b = haag_parts(model, phi, F2, 1);
    const CMat omega = retarded_state(model, a.order0.phi);
    const LatticeWickElement c = wick_commutator(a.order0, b.order0, omega) + wick_commutator(a.order0, b.order1, omega) +
                                 wick_commutator(a.order1, b.order0, omega);
    return equiv_compare(model, c, LatticeWickElement(a.order0.phi, c.cap));
}

} // namespace fedq
