#include "fedq/checks.hpp"

#include "fedq/errors.hpp"
#include "fedq/perturbative.hpp"
#include "fedq/random.hpp"
#include "fedq/serialize.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace fedq {

bool Report::passed() const
{
    for (const auto& r : records)
        if (!r.pass) return false;
    return true;
}

void Report::add(const std::string& name, const std::string& anchor, double residual, double threshold)
{
    const bool ok = std::isfinite(residual) && residual <= threshold;
    records.push_back({name, anchor, mode, residual, threshold, ok});
}

nlohmann::json Report::to_json() const
{
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records)
        recs.push_back({{"check_name", r.name},
                        {"anchor", r.anchor},
                        {"mode", r.mode},
                        {"max_residual", r.residual},
                        {"threshold", r.threshold},
                        {"status", r.pass ? "pass" : "fail"}});
    return {{"format_version", kReportFormatVersion},
            {"command", command},
            {"mode", mode},
            {"seed", seed},
            {"params", params},
            {"records", recs},
            {"data", data},
            {"status", passed() ? "pass" : "fail"}};
}

std::string Report::to_text(const nlohmann::json& rep)
{
    std::ostringstream os;
    os << rep.at("command").get<std::string>() << " (" << rep.at("mode").get<std::string>()
       << " mode, seed " << rep.at("seed").get<std::uint64_t>() << ")\n";
    int failed = 0;
    for (const auto& r : rep.at("records")) {
        const bool ok = r.at("status") == "pass";
        failed += ok ? 0 : 1;
        os << (ok ? "  pass  " : "  FAIL  ") << std::left << std::setw(40) << r.at("check_name").get<std::string>()
           << " residual " << std::scientific << std::setprecision(3) << r.at("max_residual").get<double>()
           << " <= " << r.at("threshold").get<double>() << std::defaultfloat << "  [" << r.at("anchor").get<std::string>()
           << "]\n";
    }
    os << rep.at("records").size() - failed << "/" << rep.at("records").size() << " checks passed\n";
    return os.str();
}

double Tolerances::get(const std::string& name, double fallback) const
{
    auto it = values.find(name);
    return it == values.end() ? fallback : it->second;
}

std::pair<std::string, double> Tolerances::parse(const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--tol expects NAME=VALUE, got '" + assignment + "'");
    const std::string name = assignment.substr(0, eq), value = assignment.substr(eq + 1);
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty() || !(v >= 0)) throw ConfigError("--tol " + name + ": not a non-negative number");
    return {name, v};
}

namespace {

template <class S>
double residual(const GradedElement<S>& e)
{
    if constexpr (ScalarOps<S>::exact) {
        if (e.is_zero()) return 0;
        return std::max(e.max_abs(), std::numeric_limits<double>::min());
    } else {
        return e.max_abs();
    }
}

template <class S>
double residual(const Jet<S>& j)
{
    if constexpr (ScalarOps<S>::exact) {
        if (j.is_zero()) return 0;
        return std::max(j.max_abs(), std::numeric_limits<double>::min());
    } else {
        return j.max_abs();
    }
}

template <class S>
double threshold(const SuiteOptions& opt, const std::string& name, double float_default = 1e-9)
{
    return opt.tol.get(name, ScalarOps<S>::exact ? 0.0 : float_default);
}

template <class S>
Jet<S> poisson(const Jet<S>& f, const Jet<S>& h, const ChartGeometry<S>& g)
{
    const int n = g.dim;
    Jet<S> acc(n, f.order());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Jet<S>& s = g.sigma_inv[std::size_t(i) * n + j];
            if (s.is_zero()) continue;
            acc = acc + s * f.partial(i) * h.partial(j);
        }
    return acc;
}

template <class S>
void star_axioms(Report& rep, const SuiteOptions& opt, const FedosovData<S>& fd, const Jet<S>& f, const Jet<S>& h,
                 const Jet<S>& k, const std::string& sfx)
{
    const auto fh = star(f, h, fd), hf = star(h, f, fd);
    rep.add("star_c0" + sfx, "star.c0_pointwise", residual(fh[0] - f * h), threshold<S>(opt, "star_c0"));
    const S i1 = ScalarOps<S>::imag_unit();
    rep.add("star_c1_poisson" + sfx, "star.c1_antisymmetric_poisson", residual(fh[1] - hf[1] - i1 * poisson(f, h, fd.geom)),
            threshold<S>(opt, "star_c1_poisson"));

    const auto conj = star(h.conj(), f.conj(), fd);
    double cr = 0;
    for (std::size_t p = 0; p < fh.size(); ++p) cr = std::max(cr, residual(fh[p].conj() - conj[p]));
    rep.add("star_conjugation" + sfx, "star.conjugate_reversal", cr, threshold<S>(opt, "star_conjugation"));

    const int upto = std::min<int>(2, static_cast<int>(fh.size()) - 1);
    const auto lhs = star_series(fh, HbarSeries<S>{k}, fd);
    const auto rhs = star_series(HbarSeries<S>{f}, star(h, k, fd), fd);
    double ar = 0;
    for (int p = 0; p <= upto; ++p) ar = std::max(ar, residual(lhs.at(p) - rhs.at(p)));
    rep.add("star_associativity" + sfx, "star.associativity", ar, threshold<S>(opt, "star_associativity"));

    const auto one = star(Jet<S>::constant(f.dim(), f.order(), ScalarOps<S>::from_int(1)), f, fd);
    double ur = residual(one[0] - f);
    for (std::size_t p = 1; p < one.size(); ++p) ur = std::max(ur, residual(one[p]));
    rep.add("star_unit" + sfx, "star.unit", ur, threshold<S>(opt, "star_unit"));
}

template <class S>
void verify_chart(Report& rep, const SuiteOptions& opt, const ChartGeometry<S>& g, Rng& rng, const std::string& sfx)
{
    using E = GradedElement<S>;
    const int n = g.dim, N = opt.deg, J = g.jet_order;
    auto rand_el = [&](int terms, int kmin, int kmax, int cap) { return random_element<S>(n, cap, J, rng, terms, kmin, kmax, 0.4); };

    // fiber algebra
    double hodge = 0, nil = 0, inner = 0, assoc = 0;
    E sform(n, N + 1);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) sform.add(0, (1u << a) | (1u << b), 0, g.sigma[std::size_t(a) * n + b]);
    const E ds = delta_inv_op(sform);
    for (int trial = 0; trial < 6; ++trial) {
        const E t = rand_el(8, 0, -1, N).deg_range(0, N - 1);
        hodge = std::max(hodge, residual(delta_op(delta_inv_op(t)) + delta_inv_op(delta_op(t)) + tau_project(t) - t));
        nil = std::max({nil, residual(delta_op(delta_op(t))), residual(delta_inv_op(delta_inv_op(t)))});
        inner = std::max(inner, residual(delta_op(t) - i_ad(ds, t, g.omega, N).scaled(Rational(2))));
    }
    for (int trial = 0; trial < 2; ++trial) {
        const E a = rand_el(3, 0, 1, N), b = rand_el(3, 0, 1, N), c = rand_el(3, 0, 1, N);
        assoc = std::max(assoc, residual(wick_mul(wick_mul(a, b, g.omega), c, g.omega) - wick_mul(a, wick_mul(b, c, g.omega), g.omega)));
    }
    rep.add("hodge_decomposition" + sfx, "wick.hodge_decomposition", hodge, threshold<S>(opt, "hodge_decomposition"));
    rep.add("delta_nilpotent" + sfx, "wick.delta_nilpotent", nil, threshold<S>(opt, "delta_nilpotent"));
    rep.add("delta_inner" + sfx, "wick.delta_inner_derivation", inner, threshold<S>(opt, "delta_inner"));
    rep.add("wick_associativity" + sfx, "wick.associativity", assoc, threshold<S>(opt, "wick_associativity"));

    // connection
    double ns = 0, nm = 0;
    for (const auto& x : nabla_sigma_residual(g)) ns = std::max(ns, residual(x));
    for (const auto& x : nabla_metric_residual(g)) nm = std::max(nm, residual(x));
    rep.add("nabla_sigma" + sfx, "connection.preserves_sigma", ns, threshold<S>(opt, "nabla_sigma"));
    rep.add("nabla_metric" + sfx, "connection.preserves_metric", nm, threshold<S>(opt, "nabla_metric"));

    const E t_hat = opt.inject_t_hat_sign_error ? g.t_hat.scaled(Rational(-1)) : g.t_hat;
    double anti = 0, sq = 0;
    for (int trial = 0; trial < 2; ++trial) {
        const E t = rand_el(5, 0, 2, N);
        anti = std::max(anti, residual(delta_op(nabla(t, g)) + nabla(delta_op(t), g) - i_ad(t_hat, t, g.omega, N)));
        const E s = rand_el(5, 0, 1, N);
        sq = std::max(sq, residual(nabla(nabla(s, g), g) + i_ad(g.r_hat, s, g.omega, N)));
    }
    rep.add("delta_nabla_anticommutator" + sfx, "connection.delta_nabla_anticommutator", anti,
            threshold<S>(opt, "delta_nabla_anticommutator"));
    rep.add("nabla_squared" + sfx, "connection.curvature_adjoint", sq, threshold<S>(opt, "nabla_squared"));
    rep.add("t_hat_delta_closed" + sfx, "connection.t_hat_delta_closed", residual(delta_op(g.t_hat)),
            threshold<S>(opt, "t_hat_delta_closed"));
    rep.add("bianchi_t_hat" + sfx, "connection.bianchi_t_hat", residual(nabla(g.t_hat, g) - delta_op(g.r_hat)),
            threshold<S>(opt, "bianchi_t_hat"));
    rep.add("bianchi_r_hat" + sfx, "connection.bianchi_r_hat", residual(nabla(g.r_hat, g)), threshold<S>(opt, "bianchi_r_hat"));

    // Fedosov connection
    const FedosovData<S> fd = build_r(g, N);
    rep.add("r_equation" + sfx, "fedosov.r_equation", residual(r_equation_residual(fd)), threshold<S>(opt, "r_equation"));
    const E t = rand_el(5, 0, 1, N);
    rep.add("fedosov_flatness" + sfx, "fedosov.flatness", residual(apply_D(fd, apply_D(fd, t, N - 1), N - 2)),
            threshold<S>(opt, "fedosov_flatness"));
    const Jet<S> f = random_jet<S>(n, J, rng, 0.3), h = random_jet<S>(n, J, rng, 0.3), k = random_jet<S>(n, J, rng, 0.3);
    const E qf = quantize(f, fd);
    rep.add("quantize_flat_section" + sfx, "fedosov.flat_section",
            std::max(residual(apply_D(fd, qf, N - 1)), residual(tau_project(qf) - function_element(f, N))),
            threshold<S>(opt, "quantize_flat_section"));
    star_axioms(rep, opt, fd, f, h, k, sfx);

    // gauge equivalence against the constant structure on the same sigma
    const ChartGeometry<S> g0 = build_chart(g.sigma, jm_identity<S>(n, n, J), MetricInput::Seed, N);
    const FedosovData<S> fd0 = build_r(g0, N);
    const GaugePair<S> gp = build_gauge(fd, fd0);
    rep.add("gauge_residual" + sfx, "equivalence.gauge_h_residual", residual(gauge_residual(gp, N - 1)),
            threshold<S>(opt, "gauge_residual"));
    const auto lhs = equivalence_B(star(f, h, fd), gp);
    const auto rhs = star_series(equivalence_B(HbarSeries<S>{f}, gp), equivalence_B(HbarSeries<S>{h}, gp), fd0);
    double br = 0;
    for (int p = 0; p <= std::min(2, N / 2); ++p) br = std::max(br, residual(lhs.at(p) - rhs.at(p)));
    rep.add("gauge_homomorphism" + sfx, "equivalence.b_homomorphism", br, threshold<S>(opt, "gauge_homomorphism"));
}

} // namespace

template <class S>
Report verify_suite(const SuiteOptions& opt, const ChartGeometry<S>* chart)
{
    if (opt.deg < 2 || opt.deg > 8) throw ConfigError("--deg must lie in [2, 8]");
    if (opt.jet() < 0 || opt.jet() > 10) throw ConfigError("--jet-order must lie in [0, 10]");
    Report rep;
    rep.command = "verify";
    rep.mode = ScalarOps<S>::name;
    rep.seed = opt.seed;
    rep.params = {{"deg", opt.deg}, {"jet_order", opt.jet()}};
    Rng rng(opt.seed);

    const auto n = n_coeffs(4);
    const bool n_ok = n[0] == Rational(1) && n[1] == Rational(-1, 2) && n[2] == Rational(1, 12) && n[3] == Rational(0);
    rep.add("n_coefficients", "equivalence.n_coefficients", n_ok ? 0.0 : 1.0, 0.0);

    if (chart) {
        rep.params["chart_dim"] = chart->dim;
        verify_chart(rep, opt, *chart, rng, "");
    } else {
        for (int dim : {2, 4}) {
            const ChartGeometry<S> g = random_chart<S>(dim, opt.jet(), opt.deg, rng);
            verify_chart(rep, opt, g, rng, "/dim" + std::to_string(dim));
        }
    }
    return rep;
}

template <class S>
Report star_report(const ChartGeometry<S>& chart, const Jet<S>& f, const Jet<S>& h, const Jet<S>& k, const SuiteOptions& opt)
{
    if (opt.deg < 2 || opt.deg > 8) throw ConfigError("--deg must lie in [2, 8]");
    Report rep;
    rep.command = "star";
    rep.mode = ScalarOps<S>::name;
    rep.seed = opt.seed;
    rep.params = {{"deg", opt.deg}, {"jet_order", chart.jet_order}, {"chart_dim", chart.dim}};
    const FedosovData<S> fd = build_r(chart, opt.deg);
    const auto fh = star(f, h, fd);
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t p = 0; p < fh.size(); ++p) out.push_back({{"hbar_order", p}, {"jet", to_json(fh[p])}});
    rep.data["star"] = out;
    star_axioms(rep, opt, fd, f, h, k, "");
    return rep;
}

template Report verify_suite<QQi>(const SuiteOptions&, const ChartGeometry<QQi>*);
template Report verify_suite<cplx>(const SuiteOptions&, const ChartGeometry<cplx>*);
template Report star_report<QQi>(const ChartGeometry<QQi>&, const Jet<QQi>&, const Jet<QQi>&, const Jet<QQi>&,
                                 const SuiteOptions&);
template Report star_report<cplx>(const ChartGeometry<cplx>&, const Jet<cplx>&, const Jet<cplx>&, const Jet<cplx>&,
                                  const SuiteOptions&);

namespace {

double mat_max(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
double cmat_max(const CMat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
double rel(double num, double den) { return den > 0 ? num / den : num; }

Vec uniform(int n, Rng& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

Vec window(const LatticeModel& md, int t0, int t1, Rng& rng)
{
    Vec f = Vec::Zero(md.sites());
    for (int t = std::max(t0, 0); t < std::min(t1, md.Nt); ++t) f.segment(std::size_t(t) * md.M, md.M) = uniform(md.M, rng);
    return f;
}

} // namespace

Report lattice_report(const LatticeModel& md, const SuiteOptions& opt)
{
    md.check_stability();
    if (md.Nt < 16) throw ConfigError("lattice model: Nt must be at least 16");
    Report rep;
    rep.command = "lattice";
    rep.mode = "float";
    rep.seed = opt.seed;
    const bool free_model = md.lam.size() == 0 || md.lam.isZero(0);
    rep.params = {{"M", md.M}, {"Nt", md.Nt}, {"a", md.a}, {"dt", md.dt}, {"m", md.m}, {"interacting", !free_model}};
    Rng rng(opt.seed);
    auto tol = [&](const std::string& name, double def) { return opt.tol.get(name, def); };
    const int n = md.sites(), M = md.M, Nt = md.Nt;

    const FieldHistory phi = solve_nonlinear(md, uniform(M, rng), uniform(M, rng));
    auto solution = [&](const FieldHistory& bg) { return solve_linearized(md, bg, uniform(M, rng), uniform(M, rng)); };
    const PropagatorSet ps = propagators(md, phi);
    const double w = md.w(), escale = mat_max(ps.E);

    rep.add("E_antisymmetry", "propagator.causal_antisymmetry", rel(mat_max(ps.E + ps.E.transpose()), escale),
            tol("E_antisymmetry", 1e-13));
    const Mat PR = ps.P * (w * ps.ER), PA = ps.P * (w * ps.EA);
    const Mat I = Mat::Identity(n, n);
    rep.add("retarded_inverse", "propagator.retarded_inverse", mat_max(PR.topRows(n - M) - I.topRows(n - M)),
            tol("retarded_inverse", 1e-10));
    rep.add("advanced_inverse", "propagator.advanced_inverse", mat_max(PA.bottomRows(n - M) - I.bottomRows(n - M)),
            tol("advanced_inverse", 1e-10));

    const Mat Se = sigma_c_matrix(md, early_cutoff(md)), Sl = sigma_c_matrix(md, late_cutoff(md));
    double inv = 0, indep = 0;
    for (int trial = 0; trial < 3; ++trial) {
        const FieldHistory u = solution(phi), v = solution(phi);
        const Vec g = window(md, Nt / 4 + 1, Nt - Nt / 4 - 1, rng);
        const double rhs = w * u.dot(g);
        inv = std::max(inv, rel(std::abs(u.dot(Se * (w * (ps.E * g))) - rhs), std::max(1.0, std::abs(rhs))));
        const double s1 = u.dot(Se * v);
        indep = std::max(indep, rel(std::abs(s1 - u.dot(Sl * v)), std::abs(s1)));
    }
    rep.add("sigma_inverse", "symplectic.sigma_inverse_identity", inv, tol("sigma_inverse", 1e-10));
    rep.add("cutoff_independence", "symplectic.cutoff_independence", indep, tol("cutoff_independence", 1e-10));

    const CMat WR = retarded_state(md, phi);
    rep.add("retarded_imaginary_part", "state.imaginary_part_half_E", cmat_max(CMat(WR.imag()) - ps.E.cast<cplx>() / 2.0),
            tol("retarded_imaginary_part", 1e-9));
    const Mat G = 2 * WR.real();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (G + G.transpose()), Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    rep.add("positivity", "state.positive_symmetric_part", rel(std::max(0.0, -es.eigenvalues().minCoeff()), lmax),
            tol("positivity", 1e-10));
    double pure = 0;
    const Mat JG = G * Sl;
    for (int trial = 0; trial < 3; ++trial) {
        const FieldHistory u = solution(phi);
        pure = std::max(pure, rel((JG * (JG * u) + u).cwiseAbs().maxCoeff(), u.cwiseAbs().maxCoeff()));
    }
    pure = std::max(pure, rel(mat_max(G * Sl * G + ps.E), escale));
    rep.add("purity", "state.purity_complex_structure", pure, tol("purity", 1e-8));

    int t1 = 0;
    while (t1 < Nt && md.coupling_vanishes_at(t1)) ++t1;
    const int b = std::min(t1 + 1, Nt) * M;
    const CMat W0 = ground_state(md);
    rep.add("pre_interaction_block", "state.retarded_matches_ground_state_early",
            cmat_max(CMat(WR.topLeftCorner(b, b) - W0.topLeftCorner(b, b))), tol("pre_interaction_block", 1e-12));

    const Vec hdir = uniform(n, rng);
    const Mat closed = var_EA_direction(md, phi, hdir);
    const auto fdv = var_EA_fd(md, phi, hdir, 1e-3);
    rep.add("variational_propagator", "propagator.advanced_variation", rel(mat_max(closed - fdv.first), mat_max(closed)),
            tol("variational_propagator", 1e-6));

    // alpha^R on three backgrounds
    const FieldHistory p2 = solve_nonlinear(md, uniform(M, rng), uniform(M, rng));
    const FieldHistory p3 = solve_nonlinear(md, uniform(M, rng), uniform(M, rng));
    const RetardedMap a12 = alpha_R(md, phi, p2), a23 = alpha_R(md, p2, p3), a13 = alpha_R(md, phi, p3);
    const FieldHistory u = solution(phi);
    const double us = u.cwiseAbs().maxCoeff();
    double coc = rel((a23.AR * (a12.AR * u) - a13.AR * u).cwiseAbs().maxCoeff(), us);
    const CVec c = window(md, Nt / 4 + 2, Nt / 2 + 2, rng).cast<cplx>(), d = window(md, Nt / 4 + 6, Nt / 2 + 10, rng).cast<cplx>();
    LatticeWickElement ea(phi), eb(phi);
    ea.add_scalar(0, 0.3);
    ea.add_vector(0, c);
    ea.add_matrix(0, c * d.transpose());
    eb.add_vector(0, d);
    eb.add_matrix(1, d * d.transpose());
    const LatticeWickElement zero3(p3);
    const LatticeWickElement via = apply(a23, apply(a12, ea)), direct = apply(a13, ea);
    coc = std::max(coc, rel(equiv_compare(md, via, direct), equiv_compare(md, direct, zero3)));
    rep.add("alpha_cocycle", "retarded.alpha_cocycle", coc, tol("alpha_cocycle", 1e-8));
    const LatticeWickElement lhs = apply(a13, wick_mul_lattice(ea, eb, WR));
    const LatticeWickElement rhs = wick_mul_lattice(apply(a13, ea), apply(a13, eb), retarded_state(md, p3));
    rep.add("alpha_homomorphism", "retarded.alpha_homomorphism", rel(equiv_compare(md, lhs, rhs), equiv_compare(md, lhs, zero3)),
            tol("alpha_homomorphism", 1e-8));

    const int tf = 5 * Nt / 8;
    const LocalFunctional F = {{1, window(md, tf, tf + std::max(1, Nt / 16), rng)}};
    const double bridge = check_fedosov_per(md, phi, solution(phi), F);
    rep.add("bridge_identity", "retarded.bridge_identity", bridge, tol("bridge_identity", free_model ? 1e-12 : 1e-6));

    if (M >= 4) {
        const int tc = 3 * Nt / 8;
        Vec f1 = Vec::Zero(n), f2 = Vec::Zero(n);
        f1[md.idx(tc, 0)] = 1.0;
        f2[md.idx(tc + 1, M / 2)] = 1.0;
        rep.add("causality", "retarded.einstein_causality", causality_residual(md, phi, {{1, f1}}, {{1, f2}}),
                tol("causality", 1e-8));
    }
    rep.data["max_frequency_dt"] = md.dt * md.omega_max();
    return rep;
}

} // namespace fedq
