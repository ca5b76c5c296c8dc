// Acceptance run: one line per criterion with residual, tolerance and timing.

#include "fedq/checks.hpp"
#include "fedq/errors.hpp"
#include "fedq/fedosov.hpp"
#include "fedq/perturbative.hpp"
#include "fedq/random.hpp"
#include "lattice_support.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace fedq;

namespace {

using E = GradedElement<QQi>;
using J = Jet<QQi>;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    double limit_s;
    std::function<Outcome()> run;
};

std::string sci(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", x);
    return buf;
}

bool zero(const E& e) { return e.is_zero(); }

// sum_kappa hbar^kappa / kappa! w^{i1 j1} .. w^{ik jk} d_I f d_J h by repeated differentiation.
HbarSeries<QQi> exponential_star(const J& f, const J& h, const std::vector<QQi>& w, int n, int max_kappa)
{
    struct Term {
        J a, b;
        QQi c;
    };
    std::vector<Term> cur{{f, h, QQi(1)}};
    HbarSeries<QQi> out;
    Rational fact(1);
    for (int kappa = 0; kappa <= max_kappa; ++kappa) {
        if (kappa > 0) fact = fact * Rational(kappa);
        J acc(n, f.order());
        for (const auto& t : cur) acc = acc + (t.c * (t.a * t.b)).scaled(Rational(1) / fact);
        out.push_back(acc);
        std::vector<Term> next;
        for (const auto& t : cur)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const QQi& wij = w[std::size_t(i) * n + j];
                    if (!wij.is_zero()) next.push_back({t.a.partial(i), t.b.partial(j), t.c * wij});
                }
        cur = std::move(next);
    }
    return out;
}

ChartGeometry<QQi> squeezed_chart(int n, int order, int cap)
{
    auto metric = jm_identity<QQi>(n, n, order);
    for (int a = 0; a < n / 2; ++a) {
        metric[std::size_t(2 * a) * n + 2 * a] = J::constant(n, order, QQi(2));
        metric[std::size_t(2 * a + 1) * n + 2 * a + 1] = J::constant(n, order, QQi(Rational(1, 2)));
    }
    return build_chart(standard_sigma<QQi>(n, order), metric, MetricInput::Direct, cap);
}

std::vector<QQi> omega_constants(const ChartGeometry<QQi>& g)
{
    std::vector<QQi> w(std::size_t(g.dim) * g.dim);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = g.omega.omega()[k].value();
    return w;
}

J poisson(const J& f, const J& h, const ChartGeometry<QQi>& g)
{
    const int n = g.dim;
    J acc(n, f.order());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc = acc + g.sigma_inv[std::size_t(i) * n + j] * f.partial(i) * h.partial(j);
    return acc;
}

Outcome flat_reduction()
{
    Rng rng(101);
    int compared = 0;
    bool ok = true;
    for (int n : {2, 4}) {
        const int N = 6;
        std::vector<ChartGeometry<QQi>> charts{flat_chart<QQi>(n, N + 1, N), squeezed_chart(n, N + 1, N)};
        for (const auto& g : charts) {
            const auto fd = build_r(g, N);
            ok = ok && fd.r.is_zero();
            const J f = random_jet<QQi>(n, N + 1, rng, 0.3), h = random_jet<QQi>(n, N + 1, rng, 0.3);
            const auto got = star(f, h, fd);
            const auto want = exponential_star(f, h, omega_constants(g), n, 3);
            for (int p = 0; p <= 3; ++p) ok = ok && (got.at(p) - want.at(p)).is_zero();
            ++compared;
        }
    }
    return {ok, std::to_string(compared) + " charts on R^2 and R^4, C_0..C_3 residual " + (ok ? "0" : "nonzero") + " (exact)"};
}

Outcome hodge()
{
    Rng rng(102);
    int bad = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = trial % 2 ? 4 : 2;
        const E t = random_element<QQi>(n, 6, 2, rng, 12, 0, -1, 0.4).deg_range(0, 5);
        if (!zero(delta_op(delta_inv_op(t)) + delta_inv_op(delta_op(t)) + tau_project(t) - t)) ++bad;
    }
    return {bad == 0, "100 random elements (N = 6, d = 1, 2), " + std::to_string(bad) + " nonzero residuals (exact)"};
}

Outcome identity_suite()
{
    Rng rng(103);
    int failed = 0, checks = 0;
    auto expect = [&](bool z) {
        ++checks;
        if (!z) ++failed;
    };
    for (int n : {2, 4}) {
        const int Jo = n == 2 ? 6 : 5, cap = 5;
        const auto g = random_chart<QQi>(n, Jo, cap, rng);
        E sform(n, cap + 1);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) sform.add(0, (1u << a) | (1u << b), 0, g.sigma[std::size_t(a) * n + b]);
        const E ds = delta_inv_op(sform);
        for (int trial = 0; trial < 3; ++trial) {
            const E t = random_element<QQi>(n, cap, Jo, rng, 6, 0, -1, 0.3);
            expect(zero(delta_op(t) - i_ad(ds, t, g.omega, cap).scaled(Rational(2))));
            expect(zero(delta_op(delta_op(t))));
            expect(zero(delta_inv_op(delta_inv_op(t))));
            const E s = random_element<QQi>(n, cap, Jo, rng, 5, 0, 2, 0.3);
            expect(zero(delta_op(nabla(s, g)) + nabla(delta_op(s), g) - i_ad(g.t_hat, s, g.omega, cap)));
            const E u = random_element<QQi>(n, cap, Jo, rng, 5, 0, 1, 0.3);
            expect(zero(nabla(nabla(u, g), g) + i_ad(g.r_hat, u, g.omega, cap)));
            const E v = t.deg_range(0, cap - 1);
            expect(zero(delta_op(delta_inv_op(v)) + delta_inv_op(delta_op(v)) + tau_project(v) - v));
        }
        expect(zero(delta_op(g.t_hat)));
        expect(zero(nabla(g.t_hat, g) - delta_op(g.r_hat)));
        expect(zero(nabla(g.r_hat, g)));
    }
    return {failed == 0, std::to_string(checks - failed) + "/" + std::to_string(checks) +
                             " residuals identically 0 on curved charts d = 1, 2 (exact)"};
}

Outcome fedosov_flatness()
{
    Rng rng(104);
    const int n = 4, N = 5;
    const auto g = random_chart<QQi>(n, N + 1, N, rng);
    bool non_kaehler = false;
    for (const auto& x : g.nijenhuis) non_kaehler = non_kaehler || !x.is_zero();
    const auto fd = build_r(g, N);
    bool ok = non_kaehler;
    for (int trial = 0; trial < 2; ++trial) {
        const E t = random_element<QQi>(n, N, N + 1, rng, 5, 0, 1, 0.3);
        ok = ok && zero(apply_D(fd, apply_D(fd, t, N - 1), N - 2));
    }
    return {ok, std::string("d = 2, N = 5, Nijenhuis ") + (non_kaehler ? "nonzero" : "ZERO") + ", D^2 residual " +
                    (ok ? "0" : "nonzero") + " (exact)"};
}

Outcome star_axioms()
{
    Rng rng(105);
    int failed = 0, checks = 0;
    auto expect = [&](bool z) {
        ++checks;
        if (!z) ++failed;
    };
    for (int n : {2, 4}) {
        const int N = 4;
        const auto g = random_chart<QQi>(n, N + 2, N, rng);
        const auto fd = build_r(g, N);
        for (int trial = 0; trial < 2; ++trial) {
            const J f = random_jet<QQi>(n, N + 2, rng, 0.3), h = random_jet<QQi>(n, N + 2, rng, 0.3),
                    k = random_jet<QQi>(n, N + 2, rng, 0.3);
            const auto fh = star(f, h, fd), hf = star(h, f, fd);
            expect((fh[0] - f * h).is_zero());
            expect((fh[1] - hf[1] - QQi(Rational(), Rational(1)) * poisson(f, h, g)).is_zero());
            const auto cc = star(h.conj(), f.conj(), fd);
            for (std::size_t p = 0; p < fh.size(); ++p) expect((fh[p].conj() - cc[p]).is_zero());
            const auto lhs = star_series(fh, HbarSeries<QQi>{k}, fd);
            const auto rhs = star_series(HbarSeries<QQi>{f}, star(h, k, fd), fd);
            for (int p = 0; p <= 2; ++p) expect((lhs.at(p) - rhs.at(p)).is_zero());
        }
    }
    return {failed == 0, std::to_string(checks - failed) + "/" + std::to_string(checks) +
                             " axiom residuals identically 0 on random triples, d = 1, 2 (exact)"};
}

Outcome gauge()
{
    Rng rng(106);
    const int n = 2, N = 6;
    int failed = 0, checks = 0;
    auto expect = [&](bool z) {
        ++checks;
        if (!z) ++failed;
    };
    const auto fd_curved = build_r(random_chart<QQi>(n, N + 1, N, rng), N);
    const auto fd_flat = build_r(flat_chart<QQi>(n, N + 1, N), N);
    const auto fd_sq = build_r(squeezed_chart(n, N + 1, N), N);
    const std::vector<std::pair<const FedosovData<QQi>*, const FedosovData<QQi>*>> pairs{
        {&fd_curved, &fd_flat}, {&fd_flat, &fd_curved}, {&fd_flat, &fd_sq}};
    for (const auto& [a, b] : pairs) {
        const auto gp = build_gauge(*a, *b);
        expect(gauge_residual(gp, 5).is_zero());
        const J f = random_jet<QQi>(n, N + 1, rng, 0.3), h = random_jet<QQi>(n, N + 1, rng, 0.3);
        const auto lhs = equivalence_B(star(f, h, *a), gp);
        const auto rhs = star_series(equivalence_B(HbarSeries<QQi>{f}, gp), equivalence_B(HbarSeries<QQi>{h}, gp), *b);
        for (int p = 0; p <= 2; ++p) expect((lhs.at(p) - rhs.at(p)).is_zero());
    }
    const auto nc = n_coeffs(2);
    // frozen: coefficients of x / (e^x - 1)
    expect(nc[0] == Rational(1) && nc[1] == Rational(-1, 2) && nc[2] == Rational(1, 12));
    return {failed == 0, std::to_string(checks - failed) + "/" + std::to_string(checks) +
                             " H residuals through Deg 5, B homomorphism through hbar^2, n_0..n_2 (exact)"};
}

double mat_max(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

Outcome lattice_structure()
{
    const LatticeModel md = test::desk_model();
    std::mt19937_64 rng(107);
    const FieldHistory phi = test::random_background(md, rng);
    const PropagatorSet ps = propagators(md, phi);
    const int n = md.sites(), M = md.M;
    const double w = md.w(), es = mat_max(ps.E);
    double worst = 0;
    std::ostringstream os;
    auto note = [&](const char* what, double r, double tol) {
        worst = std::max(worst, r / tol);
        os << what << " " << sci(r) << "; ";
    };
    note("E+E^T", mat_max(ps.E + ps.E.transpose()) / es, 1e-13);
    const Mat I = Mat::Identity(n, n);
    note("P E^R-Id", mat_max((ps.P * (w * ps.ER) - I).topRows(n - M)), 1e-10);
    note("P E^A-Id", mat_max((ps.P * (w * ps.EA) - I).bottomRows(n - M)), 1e-10);
    const Mat Se = sigma_c_matrix(md, early_cutoff(md)), Sl = sigma_c_matrix(md, late_cutoff(md));
    double inv = 0, ind = 0;
    for (int trial = 0; trial < 3; ++trial) {
        const FieldHistory u = test::random_solution(md, phi, rng), v = test::random_solution(md, phi, rng);
        const Vec g = test::random_test_function(md, 20, 44, rng);
        const double rhs = w * u.dot(g);
        inv = std::max(inv, std::abs(u.dot(Se * (w * (ps.E * g))) - rhs) / std::max(1.0, std::abs(rhs)));
        const double s1 = u.dot(Se * v);
        ind = std::max(ind, std::abs(s1 - u.dot(Sl * v)) / std::abs(s1));
    }
    note("sigma-inverse", inv, 1e-10);
    note("cutoff", ind, 1e-10);
    const CMat WR = retarded_state(md, phi);
    note("Im w-E/2", CMat(WR.imag() - ps.E / 2).cwiseAbs().maxCoeff(), 1e-9);
    const Mat G = 2 * WR.real();
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (G + G.transpose()), Eigen::EigenvaluesOnly);
    note("neg. eig G", std::max(0.0, -eig.eigenvalues().minCoeff()) / eig.eigenvalues().maxCoeff(), 1e-10);
    double pure = mat_max(G * Sl * G + ps.E) / es;
    for (int trial = 0; trial < 3; ++trial) {
        const FieldHistory u = test::random_solution(md, phi, rng);
        pure = std::max(pure, (G * Sl * (G * Sl * u) + u).cwiseAbs().maxCoeff() / u.cwiseAbs().maxCoeff());
    }
    note("(G Sc)^2+id", pure, 1e-8);
    int t1 = 0;
    while (md.coupling_vanishes_at(t1)) ++t1;
    const int b = (t1 + 1) * M;
    const CMat Wfree = retarded_state(md, Vec::Zero(n));
    const double bitwise = CMat(WR.topLeftCorner(b, b) - Wfree.topLeftCorner(b, b)).cwiseAbs().maxCoeff();
    const double modes = CMat(WR.topLeftCorner(b, b) - ground_state(md).topLeftCorner(b, b)).cwiseAbs().maxCoeff();
    note("early block vs w0", modes, 1e-12);
    os << "early block bitwise " << (bitwise == 0 ? "equal" : "DIFFERENT");
    return {worst <= 1 && bitwise == 0, os.str()};
}

Outcome variational()
{
    const LatticeModel md = test::desk_model();
    std::mt19937_64 rng(108);
    const FieldHistory phi = test::random_background(md, rng);
    const Vec h = test::random_vec(md.sites(), rng);
    const Mat closed = var_EA_direction(md, phi, h);
    const auto fd = var_EA_fd(md, phi, h, 1e-3);
    const double rel = mat_max(closed - fd.first) / mat_max(closed);
    return {rel <= 1e-6, "relative error " + sci(rel) + " (tol 1e-6)"};
}

Outcome alpha()
{
    const LatticeModel md = test::desk_model();
    std::mt19937_64 rng(109);
    const FieldHistory p1 = test::random_background(md, rng), p2 = test::random_background(md, rng),
                       p3 = test::random_background(md, rng);
    const RetardedMap a12 = alpha_R(md, p1, p2), a23 = alpha_R(md, p2, p3), a13 = alpha_R(md, p1, p3);
    const FieldHistory u = test::random_solution(md, p1, rng);
    double coc = (a23.AR * (a12.AR * u) - a13.AR * u).cwiseAbs().maxCoeff() / u.cwiseAbs().maxCoeff();
    const CVec c = test::random_test_function(md, 20, 40, rng).cast<cplx>(), d = test::random_test_function(md, 24, 44, rng).cast<cplx>();
    LatticeWickElement a(p1), bb(p1);
    a.add_scalar(0, 0.3);
    a.add_vector(0, c);
    a.add_matrix(0, c * d.transpose());
    bb.add_vector(0, d);
    bb.add_matrix(1, d * d.transpose());
    const LatticeWickElement none(p3);
    const LatticeWickElement direct = apply(a13, a);
    coc = std::max(coc, equiv_compare(md, apply(a23, apply(a12, a)), direct) / equiv_compare(md, direct, none));
    const LatticeWickElement lhs = apply(a13, wick_mul_lattice(a, bb, retarded_state(md, p1)));
    const LatticeWickElement rhs = wick_mul_lattice(apply(a13, a), apply(a13, bb), retarded_state(md, p3));
    const double hom = equiv_compare(md, lhs, rhs) / equiv_compare(md, lhs, none);
    return {coc <= 1e-8 && hom <= 1e-8, "cocycle " + sci(coc) + ", homomorphism " + sci(hom) + " (relative, tol 1e-8)"};
}

Outcome bridge()
{
    double res[2];
    int i = 0;
    for (double amp : {0.0125, 0.025}) {
        const LatticeModel md = test::desk_model(amp);
        std::mt19937_64 rng(110);
        const FieldHistory phi = test::random_background(md, rng);
        const FieldHistory u = test::random_solution(md, phi, rng);
        res[i++] = check_fedosov_per(md, phi, u, {{1, test::random_test_function(md, 40, 44, rng)}});
    }
    const double ratio = res[1] / res[0];
    const bool ok = res[0] <= 1e-6 && std::abs(ratio - 4) <= 0.8;
    return {ok, "residual " + sci(res[0]) + " (tol 1e-6), doubling lambda ratio " + sci(ratio) + " (4 +- 20%)"};
}

Outcome causality()
{
    const LatticeModel md = test::desk_model();
    std::mt19937_64 rng(111);
    const FieldHistory phi = test::random_background(md, rng);
    double worst = 0;
    int pairs = 0;
    // pairs of points more than one site apart per time step
    for (int t : {20, 24, 28})
        for (int dx : {2, 3, 4}) {
            Vec f1 = Vec::Zero(md.sites()), f2 = Vec::Zero(md.sites());
            f1[md.idx(t, 1)] = 1.0;
            f2[md.idx(t + 1, 1 + dx)] = 0.7;
            f1[md.idx(t, 2)] = -0.4;
            f2[md.idx(t + 1, (2 + dx + 1) % md.M)] = 0.3;
            worst = std::max(worst, causality_residual(md, phi, {{1, f1}}, {{1, f2}}));
            ++pairs;
        }
    return {worst <= 1e-8, std::to_string(pairs) + " spacelike pairs, max commutator residual " + sci(worst) + " (tol 1e-8)"};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "flat-chart reduction", 10, flat_reduction},
        {2, "Hodge decomposition", 5, hodge},
        {3, "connection identity suite", 60, identity_suite},
        {4, "Fedosov flatness", 300, fedosov_flatness},
        {5, "star-product axioms", 300, star_axioms},
        {6, "gauge equivalence", 300, gauge},
        {7, "lattice structure suite", 30, lattice_structure},
        {8, "variational propagator identity", 30, variational},
        {9, "alpha^R cocycle and homomorphism", 60, alpha},
        {10, "bridge identity", 600, bridge},
        {11, "Einstein causality", 60, causality},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.limit_s;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("[%s] %2d %-34s %7.2f s (limit %.0f s)  %s\n", pass ? "PASS" : "FAIL", c.id, c.title, secs, c.limit_s,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
