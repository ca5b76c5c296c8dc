#include "fedq/lattice.hpp"

#include "fedq/errors.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <string>

namespace fedq {

namespace {

constexpr double kBlowUp = 1e6;

Vec slice(const LatticeModel& md, const Vec& u, int t) { return u.segment(std::size_t(t) * md.M, md.M); }

// (Lap - m^2 - v_t) u_t on one slice.
Vec apply_L(const LatticeModel& md, const Vec& u, const Vec* v, int t)
{
    const int M = md.M;
    const double ia2 = 1.0 / (md.a * md.a);
    Vec r(M);
    for (int x = 0; x < M; ++x) {
        const double ux = u[x];
        const double lap = (u[(x + 1) % M] - 2 * ux + u[(x + M - 1) % M]) * ia2;
        r[x] = lap - md.m * md.m * ux;
        if (v) r[x] -= (*v)[md.idx(t, x)] * ux;
    }
    return r;
}

Mat slice_operator(const LatticeModel& md)
{
    const int M = md.M;
    const double ia2 = 1.0 / (md.a * md.a);
    Mat L = Mat::Zero(M, M);
    for (int x = 0; x < M; ++x) {
        L(x, x) -= 2 * ia2 + md.m * md.m;
        L(x, (x + 1) % M) += ia2;
        L(x, (x + M - 1) % M) += ia2;
    }
    return L;
}

void check_size(const LatticeModel& md, const Vec& u, const char* what)
{
    if (u.size() != md.sites()) throw ConfigError(std::string(what) + ": expected " + std::to_string(md.sites()) + " entries");
}

void check_data(const LatticeModel& md, const Vec& q, const Vec& p)
{
    if (q.size() != md.M || p.size() != md.M) throw ConfigError("Cauchy data must have M entries");
}

void guard(double norm, double init)
{
    if (!std::isfinite(norm) || (init > 0 && norm > kBlowUp * init)) throw StabilityError("blow-up: reduce dt");
}

// Generic leapfrog; cubic adds the -lam u^3/3! term, v (optional) the linear potential.
Vec leapfrog(const LatticeModel& md, Vec first, Vec second, bool backward, bool cubic, const Vec* v)
{
    md.check_stability();
    const int Nt = md.Nt, M = md.M;
    const double dt2 = md.dt * md.dt;
    Vec u = Vec::Zero(md.sites());
    const int t0 = backward ? Nt - 1 : 0;
    const int step = backward ? -1 : 1;
    u.segment(std::size_t(t0) * M, M) = first;
    if (Nt > 1) u.segment(std::size_t(t0 + step) * M, M) = second;
    const double init = std::max(first.norm(), second.norm());
    for (int k = 1; k + 1 < Nt; ++k) {
        const int t = t0 + step * k;
        Vec ut = slice(md, u, t);
        Vec rhs = apply_L(md, ut, v, t);
        if (cubic)
            for (int x = 0; x < M; ++x) rhs[x] -= md.lam[md.idx(t, x)] * ut[x] * ut[x] * ut[x] / 6.0;
        Vec next = 2 * ut - slice(md, u, t - step) + dt2 * rhs;
        guard(next.norm(), init);
        u.segment(std::size_t(t + step) * M, M) = next;
    }
    return u;
}

// Retarded (forward) or advanced (backward) inverse of P_d as an operator matrix.
Mat causal_inverse(const LatticeModel& md, const Vec& v, bool advanced)
{
    const int Nt = md.Nt, M = md.M, n = md.sites();
    const double dt2 = md.dt * md.dt;
    const Mat L = slice_operator(md);
    Mat G = Mat::Zero(n, n);
    for (int s = 0; s < Nt; ++s) {
        const int step = advanced ? -1 : 1;
        const int first = s + step;
        if (first < 0 || first >= Nt) continue;
        Mat prev = Mat::Zero(M, M);
        Mat cur = -dt2 * Mat::Identity(M, M);
        G.block(std::size_t(first) * M, std::size_t(s) * M, M, M) = cur;
        for (int t = first; t + step >= 0 && t + step < Nt; t += step) {
            Mat next = 2 * cur - prev + dt2 * (L * cur);
            for (int x = 0; x < M; ++x) next.row(x) -= dt2 * v[md.idx(t, x)] * cur.row(x);
            G.block(std::size_t(t + step) * M, std::size_t(s) * M, M, M) = next;
            prev = std::move(cur);
            cur = std::move(next);
        }
    }
    return G;
}

double theta_of(const LatticeModel& md, int k)
{
    const double om = md.omega_k(k);
    return std::acos(1 - md.dt * md.dt * om * om / 2);
}

} // namespace

double bump(double s)
{
    if (std::abs(s) >= 1) return 0;
    return std::exp(1 - 1 / (1 - s * s));
}

double LatticeModel::omega_k(int k) const
{
    const double c = std::cos(2 * std::numbers::pi * k / M);
    return std::sqrt(m * m + 2 / (a * a) * (1 - c));
}

double LatticeModel::omega_max() const
{
    double w = 0;
    for (int k = 0; k < M; ++k) w = std::max(w, omega_k(k));
    return w;
}

void LatticeModel::check_stability() const
{
    const double r = dt * omega_max();
    if (!(r < 2))
        throw StabilityError("CFL bound violated: dt * omega_max = " + std::to_string(r) + " must be < 2");
}

bool LatticeModel::coupling_vanishes_at(int t) const
{
    if (lam.size() == 0) return true;
    for (int x = 0; x < M; ++x)
        if (lam[idx(t, x)] != 0) return false;
    return true;
}

void LatticeModel::check_coupling() const
{
    if (lam.size() != sites()) throw ConfigError("lambda profile must have Nt*M entries");
    for (int i = 0; i < lam.size(); ++i)
        if (lam[i] < 0) throw ConfigError("lambda must be non-negative");
    const int q = Nt / 4;
    for (int t = 0; t < Nt; ++t)
        if ((t < q || t >= Nt - q) && !coupling_vanishes_at(t))
            throw ConfigError("lambda must vanish on the first and last quarter of the time grid (slice " +
                              std::to_string(t) + ")");
}

LatticeModel LatticeModel::make(int M, double a, double dt, int Nt, double m, const BumpProfile& b)
{
    if (M < 1) throw ConfigError("M must be positive");
    if (Nt < 8) throw ConfigError("Nt must be at least 8");
    if (!(a > 0) || !(dt > 0)) throw ConfigError("a and dt must be positive");
    if (!(m > 0)) throw ConfigError("m must be positive");
    LatticeModel md;
    md.M = M;
    md.a = a;
    md.dt = dt;
    md.Nt = Nt;
    md.m = m;
    md.lam = Vec::Zero(md.sites());
    if (b.amplitude != 0) {
        if (!(b.t_width > 0) || !(b.x_width > 0)) throw ConfigError("lambda widths must be positive");
        const double L = M * a;
        for (int t = 0; t < Nt; ++t)
            for (int x = 0; x < M; ++x) {
                double d = std::fmod(std::abs(x * a - b.x_center), L);
                d = std::min(d, L - d);
                md.lam[md.idx(t, x)] = b.amplitude * bump((t * dt - b.t_center) / b.t_width) * bump(d / b.x_width);
            }
    }
    md.check_coupling();
    return md;
}

LatticeModel LatticeModel::from_json(const nlohmann::json& j)
{
    auto need = [&](const nlohmann::json& o, const char* key) -> const nlohmann::json& {
        if (!o.is_object() || !o.contains(key)) throw ConfigError(std::string("model: missing field '") + key + "'");
        return o.at(key);
    };
    auto num = [&](const nlohmann::json& o, const char* key) {
        const auto& v = need(o, key);
        if (!v.is_number()) throw ConfigError(std::string("model: field '") + key + "' must be a number");
        return v.get<double>();
    };
    auto integer = [&](const nlohmann::json& o, const char* key) {
        const auto& v = need(o, key);
        if (!v.is_number_integer()) throw ConfigError(std::string("model: field '") + key + "' must be an integer");
        return v.get<int>();
    };
    BumpProfile b;
    if (j.contains("lambda")) {
        const auto& l = j.at("lambda");
        b.t_center = num(l, "t_center");
        b.t_width = num(l, "t_width");
        b.x_center = num(l, "x_center");
        b.x_width = num(l, "x_width");
        b.amplitude = num(l, "amplitude");
    }
    return make(integer(j, "M"), num(j, "a"), num(j, "dt"), integer(j, "Nt"), num(j, "m"), b);
}

FieldHistory solve_nonlinear(const LatticeModel& md, const Vec& q, const Vec& p)
{
    check_data(md, q, p);
    return leapfrog(md, q, q + md.dt * p, false, true, nullptr);
}

FieldHistory solve_nonlinear_backward(const LatticeModel& md, const Vec& q, const Vec& p)
{
    check_data(md, q, p);
    return leapfrog(md, q + md.dt * p, q, true, true, nullptr);
}

FieldHistory solve_linearized(const LatticeModel& md, const FieldHistory& phi, const Vec& q, const Vec& p)
{
    check_data(md, q, p);
    const Vec v = potential(md, phi);
    return leapfrog(md, q, q + md.dt * p, false, false, &v);
}

FieldHistory solve_linearized_backward(const LatticeModel& md, const FieldHistory& phi, const Vec& q, const Vec& p)
{
    check_data(md, q, p);
    const Vec v = potential(md, phi);
    return leapfrog(md, q + md.dt * p, q, true, false, &v);
}

std::pair<Vec, Vec> cauchy_data(const LatticeModel& md, const FieldHistory& u, int t)
{
    check_size(md, u, "cauchy_data");
    if (t < 0 || t + 1 >= md.Nt) throw ConfigError("cauchy_data: slice out of range");
    Vec q = slice(md, u, t);
    return {q, (slice(md, u, t + 1) - q) / md.dt};
}

Vec potential(const LatticeModel& md, const FieldHistory& phi)
{
    if (phi.size() == 0) return Vec::Zero(md.sites());
    check_size(md, phi, "background");
    return (md.lam.array() * phi.array().square() / 2).matrix();
}

Mat kg_operator(const LatticeModel& md, const Vec& v)
{
    check_size(md, v, "potential");
    const int Nt = md.Nt, M = md.M;
    const double idt2 = 1.0 / (md.dt * md.dt);
    const Mat L = slice_operator(md);
    Mat P = Mat::Zero(md.sites(), md.sites());
    for (int t = 0; t < Nt; ++t) {
        auto blk = P.block(std::size_t(t) * M, std::size_t(t) * M, M, M);
        blk = L;
        blk.diagonal().array() += 2 * idt2;
        for (int x = 0; x < M; ++x) blk(x, x) -= v[md.idx(t, x)];
        if (t > 0) P.block(std::size_t(t) * M, std::size_t(t - 1) * M, M, M).diagonal().setConstant(-idt2);
        if (t + 1 < Nt) P.block(std::size_t(t) * M, std::size_t(t + 1) * M, M, M).diagonal().setConstant(-idt2);
    }
    return P;
}

PropagatorSet propagators(const LatticeModel& md, const FieldHistory& phi)
{
    md.check_stability();
    const Vec v = potential(md, phi);
    PropagatorSet ps;
    const double iw = 1.0 / md.w();
    ps.ER = causal_inverse(md, v, false) * iw;
    ps.EA = causal_inverse(md, v, true) * iw;
    ps.E = ps.EA - ps.ER;
    ps.P = kg_operator(md, v);
    return ps;
}

Mat transfer(const LatticeModel& md, const FieldHistory& phi)
{
    const int M = md.M;
    Mat T(md.sites(), 2 * M);
    const Vec z = Vec::Zero(M);
    for (int j = 0; j < M; ++j) {
        Vec e = Vec::Unit(M, j);
        T.col(j) = solve_linearized(md, phi, e, z);
        T.col(M + j) = solve_linearized(md, phi, z, e);
    }
    return T;
}

Vec step_profile(const LatticeModel& md, int t0, int t1)
{
    if (t0 < 0 || t1 <= t0 || t1 >= md.Nt) throw ConfigError("step_profile: need 0 <= t0 < t1 < Nt");
    Vec c(md.Nt);
    for (int t = 0; t < md.Nt; ++t) {
        if (t <= t0) c[t] = 1;
        else if (t >= t1) c[t] = 0;
        else {
            // smooth step built from the bump's tails
            const double s = double(t - t0) / (t1 - t0);
            const double f0 = std::exp(-1 / (1 - s)), f1 = std::exp(-1 / s);
            c[t] = f0 / (f0 + f1);
        }
    }
    return c;
}

Vec early_cutoff(const LatticeModel& md) { return step_profile(md, 2, md.Nt / 4 - 1); }
Vec late_cutoff(const LatticeModel& md) { return step_profile(md, md.Nt - md.Nt / 4, md.Nt - 2); }

Mat sigma_c_matrix(const LatticeModel& md, const Vec& c)
{
    if (c.size() != md.Nt) throw ConfigError("cutoff profile must have Nt entries");
    for (int t = 0; t < md.Nt; ++t) {
        const bool varies = (t > 0 && c[t] != c[t - 1]) || (t + 1 < md.Nt && c[t] != c[t + 1]);
        if (varies && !md.coupling_vanishes_at(t))
            throw ConfigError("cutoff profile varies at slice " + std::to_string(t) + " where lambda is nonzero");
    }
    const Mat P0 = kg_operator(md, Vec::Zero(md.sites()));
    Vec cw(md.sites());
    for (int t = 0; t < md.Nt; ++t) cw.segment(std::size_t(t) * md.M, md.M).setConstant(md.w() * c[t]);
    Mat S = P0 * cw.asDiagonal();
    S -= cw.asDiagonal() * P0;
    return S;
}

double slice_symplectic(const LatticeModel& md, const FieldHistory& u, const FieldHistory& v, int t)
{
    if (t < 0 || t + 1 >= md.Nt) throw ConfigError("slice_symplectic: slice out of range");
    return md.a * (slice(md, u, t).dot(slice(md, v, t + 1)) - slice(md, u, t + 1).dot(slice(md, v, t))) / md.dt;
}

CMat ground_state(const LatticeModel& md)
{
    md.check_stability();
    const int Nt = md.Nt, M = md.M;
    std::vector<double> th(M);
    for (int k = 0; k < M; ++k) th[k] = theta_of(md, k);
    const double pref = md.dt * md.dt / (2 * M * md.w());
    // tau = t - s, d = x - y (mod M)
    std::vector<cplx> tab(std::size_t(2 * Nt - 1) * M);
    for (int tau = -(Nt - 1); tau < Nt; ++tau)
        for (int d = 0; d < M; ++d) {
            cplx acc = 0;
            for (int k = 0; k < M; ++k)
                acc += pref / std::sin(th[k]) * std::polar(1.0, th[k] * tau) * std::cos(2 * std::numbers::pi * k * d / M);
            tab[std::size_t(tau + Nt - 1) * M + d] = acc;
        }
    CMat W(md.sites(), md.sites());
    for (int t = 0; t < Nt; ++t)
        for (int s = 0; s < Nt; ++s)
            for (int x = 0; x < M; ++x)
                for (int y = 0; y < M; ++y)
                    W(md.idx(t, x), md.idx(s, y)) = tab[std::size_t(t - s + Nt - 1) * M + (x - y + M) % M];
    return W;
}

CMat ground_data(const LatticeModel& md)
{
    const int M = md.M;
    const CMat W = ground_state(md).topLeftCorner(2 * M, 2 * M);
    Mat B = Mat::Zero(2 * M, 2 * M);
    B.topLeftCorner(M, M).setIdentity();
    B.bottomLeftCorner(M, M).diagonal().setConstant(-1 / md.dt);
    B.bottomRightCorner(M, M).diagonal().setConstant(1 / md.dt);
    return B * W * B.transpose();
}

CMat retarded_state(const LatticeModel& md, const FieldHistory& phi)
{
    const Mat T = transfer(md, phi);
    const CMat D = ground_data(md);
    return T * D * T.transpose();
}

CMat retarded_state_sandwich(const LatticeModel& md, const FieldHistory& phi, const Vec& c_minus, const Vec& c_plus,
                             const Vec& chi)
{
    if (chi.size() != md.sites()) throw ConfigError("chi must have Nt*M entries");
    const Mat Sm = sigma_c_matrix(md, c_minus);
    const Mat Sp = sigma_c_matrix(md, c_plus);
    const Vec phim = (chi.array() * phi.array()).matrix();
    const Mat E = propagators(md, phi).E;
    const Mat Em = propagators(md, phim).E;
    const Mat X = E * Sp * Em * Sm;
    return X * ground_state(md) * X.transpose();
}

Mat var_EA_direction(const LatticeModel& md, const FieldHistory& phi, const Vec& h)
{
    check_size(md, h, "direction");
    const Mat EA = propagators(md, phi).EA;
    const Vec dv = (md.lam.array() * phi.array() * h.array()).matrix();
    return md.w() * EA * dv.asDiagonal() * EA;
}

Mat var_EA_at(const LatticeModel& md, const FieldHistory& phi, int y)
{
    if (y < 0 || y >= md.sites()) throw ConfigError("var_EA_at: site out of range");
    check_size(md, phi, "background");
    const double k = md.lam[y] * phi[y];
    if (k == 0) return Mat::Zero(md.sites(), md.sites());
    const Mat EA = propagators(md, phi).EA;
    return k * EA.col(y) * EA.row(y);
}

std::pair<Mat, double> var_EA_fd(const LatticeModel& md, const FieldHistory& phi, const Vec& h, double eps)
{
    auto central = [&](double e) {
        const Mat p = propagators(md, phi + e * h).EA;
        const Mat m = propagators(md, phi - e * h).EA;
        return Mat((p - m) / (2 * e));
    };
    const Mat d1 = central(eps);
    const Mat d2 = central(eps / 2);
    Mat r = (4 * d2 - d1) / 3;
    return {r, (r - d2).cwiseAbs().maxCoeff()};
}

namespace {

// Fornberg weights for derivative `k` on the integer nodes -P..P.
std::vector<double> fd_weights(int k, int P)
{
    const int n = 2 * P + 1;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = i - P;
    std::vector<std::vector<std::vector<double>>> d(k + 1, std::vector<std::vector<double>>(n, std::vector<double>(n, 0)));
    d[0][0][0] = 1;
    double c1 = 1;
    for (int i = 1; i < n; ++i) {
        double c2 = 1;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            for (int m = 0; m <= std::min(i, k); ++m) {
                const double lo = m > 0 ? d[m - 1][i - 1][j] : 0;
                d[m][i][j] = (x[i] * d[m][i - 1][j] - m * lo) / c3;
            }
        }
        for (int m = 0; m <= std::min(i, k); ++m) {
            const double lo = m > 0 ? d[m - 1][i - 1][i - 1] : 0;
            d[m][i][i] = c1 / c2 * (m * lo - x[i - 1] * d[m][i - 1][i - 1]);
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int j = 0; j < n; ++j) w[j] = d[k][n - 1][j];
    return w;
}

struct ChartSample {
    Mat sigma;
    Mat g;
};

} // namespace

LatticeChartJets geometry_jets(const LatticeModel& md, const FieldHistory& phi, const std::vector<FieldHistory>& basis,
                               int order, double h)
{
    const int n = static_cast<int>(basis.size());
    if (n == 0 || n % 2 != 0 || n > 4) throw ConfigError("geometry_jets: basis size must be 2 or 4");
    if (order < 0 || order > 3) throw ConfigError("geometry_jets: jet order must lie in [0, 3]");
    check_size(md, phi, "background");
    const int late = md.Nt - 2;
    const auto [Q, Pm] = cauchy_data(md, phi, late);
    std::vector<std::pair<Vec, Vec>> dat;
    for (const auto& u : basis) dat.push_back(cauchy_data(md, u, late));
    const Mat Sc = sigma_c_matrix(md, late_cutoff(md));
    const Mat D2 = 2 * ground_data(md).real();

    auto sample = [&](const std::vector<double>& z) {
        Vec q = Q, p = Pm;
        for (int i = 0; i < n; ++i) {
            q += z[i] * dat[i].first;
            p += z[i] * dat[i].second;
        }
        const FieldHistory bg = solve_nonlinear_backward(md, q, p);
        const Mat T = transfer(md, bg);
        Mat U(md.sites(), n);
        for (int i = 0; i < n; ++i) U.col(i) = solve_linearized_backward(md, bg, dat[i].first, dat[i].second);
        const Mat SU = Sc * U;
        const Mat Y = T.transpose() * SU;
        return ChartSample{U.transpose() * SU, Y.transpose() * D2 * Y};
    };

    LatticeChartJets out;
    out.dim = n;
    const ChartSample base = sample(std::vector<double>(n, 0.0));
    out.sigma_gram = base.sigma;
    if (std::abs(base.sigma.determinant()) < 1e-8) throw ConfigError("geometry_jets: basis is not symplectically independent");
    const Mat A = base.sigma.inverse() * base.g;
    out.acs_residual = (A * A + Mat::Identity(n, n)).cwiseAbs().maxCoeff();

    constexpr int P = 3;
    std::vector<std::vector<double>> wts(order + 1);
    for (int k = 0; k <= order; ++k) wts[k] = fd_weights(k, P);

    // Tensor-product central differences at step hh, memoised on the integer offsets.
    auto derivatives = [&](double hh) {
        std::map<std::vector<int>, Mat> cache;
        auto at = [&](const std::vector<int>& off) -> const Mat& {
            auto it = cache.find(off);
            if (it != cache.end()) return it->second;
            std::vector<double> z(n);
            for (int i = 0; i < n; ++i) z[i] = hh * off[i];
            return cache.emplace(off, sample(z).g).first->second;
        };
        const MonomialTable& tab = MonomialTable::get(n);
        std::vector<Mat> der(tab.count(order));
        for (int idx = 0; idx < tab.count(order); ++idx) {
            const Exps& e = tab.exps(idx);
            Mat acc = Mat::Zero(n, n);
            std::vector<int> off(n, 0), pos(n, 0);
            // iterate over stencil points of the active variables
            std::vector<int> active;
            for (int i = 0; i < n; ++i)
                if (e[i] > 0) active.push_back(i);
            const int na = static_cast<int>(active.size());
            std::vector<int> cnt(na, 0);
            while (true) {
                double wgt = 1;
                for (int a = 0; a < na; ++a) {
                    off[active[a]] = cnt[a] - P;
                    wgt *= wts[e[active[a]]][cnt[a]];
                }
                if (wgt != 0) acc += wgt * at(off);
                int a = 0;
                while (a < na && ++cnt[a] == 2 * P + 1) cnt[a++] = 0;
                if (a == na) break;
            }
            double scale = 1;
            for (int i = 0; i < n; ++i) scale *= std::pow(hh, e[i]);
            der[idx] = acc / scale;
        }
        return der;
    };

    const std::vector<Mat> d1 = derivatives(h);
    const std::vector<Mat> d2 = derivatives(h / 2);
    const MonomialTable& tab = MonomialTable::get(n);
    out.sigma.assign(std::size_t(n) * n, Jet<cplx>(n, order));
    out.metric.assign(std::size_t(n) * n, Jet<cplx>(n, order));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.sigma[std::size_t(i) * n + j].coeff_mut(0) = 0.5 * (base.sigma(i, j) - base.sigma(j, i));
    for (int idx = 0; idx < tab.count(order); ++idx) {
        const Exps& e = tab.exps(idx);
        int q = 100;
        double fact = 1;
        for (int i = 0; i < n; ++i) {
            if (e[i] > 0) q = std::min(q, 2 * ((2 * P + 2 - e[i]) / 2));
            fact *= std::tgamma(e[i] + 1.0);
        }
        Mat d = d2[idx];
        if (q < 100) {
            const double r = std::pow(2.0, q);
            d = (r * d2[idx] - d1[idx]) / (r - 1);
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                // symmetrise against stencil rounding
                const double val = 0.5 * (d(i, j) + d(j, i)) / fact;
                out.metric[std::size_t(i) * n + j].coeff_mut(idx) = val;
            }
    }
    return out;
}

} // namespace fedq
