#pragma once

#include "fedq/geometry.hpp"

#include <type_traits>
#include <vector>

namespace fedq {

// hbar-series of functions: entry k is the coefficient of hbar^k.
template <class S>
using HbarSeries = std::vector<Jet<S>>;

template <class S>
struct FedosovData {
    ChartGeometry<S> geom;
    int cap = 0;
    GradedElement<S> r;
    GradedElement<S> aux_omega; // central 2-form, p >= 1
    GradedElement<S> aux_s;     // Deg >= 3, k = 0
};

// Solves  delta r = nabla r + (i/hbar) r.r - R^ - T^ - Omega  with delta^{-1} r = s,
// degree by degree through Deg N.
template <class S>
FedosovData<S> build_r(const ChartGeometry<S>& geom, int N, std::type_identity_t<const GradedElement<S>*> aux_omega = nullptr,
                       std::type_identity_t<const GradedElement<S>*> aux_s = nullptr);

// Left-hand side of the r equation minus Omega; zero through Deg N-1 for a solution.
template <class S>
GradedElement<S> r_equation_residual(const FedosovData<S>& fd);

// D = nabla - delta + (i/hbar) ad r, outputs up to Deg out_cap.
template <class S>
GradedElement<S> apply_D(const FedosovData<S>& fd, const GradedElement<S>& a, int out_cap);
// Same with an arbitrary one-form in place of r (used for D^alpha).
template <class S>
GradedElement<S> apply_D_with(const ChartGeometry<S>& geom, const GradedElement<S>& r, const GradedElement<S>& a,
                              int out_cap);

// tau^{-1}: the unique D-flat section with tau t = f.
template <class S>
GradedElement<S> quantize(const Jet<S>& f, const FedosovData<S>& fd);
template <class S>
GradedElement<S> quantize_series(const HbarSeries<S>& f, const FedosovData<S>& fd);

// Coefficients C_0 .. C_{N/2} of f * h.
template <class S>
HbarSeries<S> star(const Jet<S>& f, const Jet<S>& h, const FedosovData<S>& fd);
template <class S>
HbarSeries<S> star_series(const HbarSeries<S>& f, const HbarSeries<S>& h, const FedosovData<S>& fd);

// Reads off the hbar coefficients of the (k = 0, n = 0) part.
template <class S>
HbarSeries<S> tau_series(const GradedElement<S>& t, int max_power);

// alpha = exp((hbar/2) (w' - w)^{ij} d_{y^i} d_{y^j}): W(w) -> W(w').
template <class S>
GradedElement<S> alpha_map(const GradedElement<S>& a, const FiberForm<S>& w, const FiberForm<S>& wp);

template <class S>
GradedElement<S> c_tensor(const ChartGeometry<S>& g, const ChartGeometry<S>& gp, int cap);

std::vector<Rational> n_coeffs(int max_order);

template <class S>
struct GaugePair {
    FedosovData<S> fd;  // structure w
    FedosovData<S> fdp; // structure w'
    GradedElement<S> c;
    GradedElement<S> r_alpha;     // alpha^{-1} r' - C, exact through Deg N-1
    GradedElement<S> omega_alpha; // central curvature of D^alpha
    GradedElement<S> theta0;      // primitive: d theta0 = Omega - omega_alpha
    GradedElement<S> theta;       // user part, closed, p >= 1
    GradedElement<S> h;
    std::vector<Rational> n;
};

// Central 2-form  alpha^{-1} R^' - R^ - nabla C + (i/hbar) C.C + Omega'.
template <class S>
GradedElement<S> alpha_curvature(const FedosovData<S>& fd, const FedosovData<S>& fdp, const GradedElement<S>& c);

// de Rham homotopy on hbar-series of scalar forms (n = 0): d K + K d = id in positive form degree.
template <class S>
GradedElement<S> form_primitive(const GradedElement<S>& beta);

// Builds C, r^alpha and the gauge generator H (fixed point through Deg N).
template <class S>
GaugePair<S> build_gauge(const FedosovData<S>& fd, const FedosovData<S>& fdp,
                         std::type_identity_t<const GradedElement<S>*> theta = nullptr);

// r - r^alpha + sum_k ((i/hbar) ad H)^k (D^alpha H) / (k+1)! - theta0 - theta.
template <class S>
GradedElement<S> gauge_residual(const GaugePair<S>& gp, int out_cap);

// B = tau alpha exp(-(i/hbar) ad H) tau^{-1}.
template <class S>
HbarSeries<S> equivalence_B(const HbarSeries<S>& f, const GaugePair<S>& gp);

// exp(s (i/hbar) ad H)(t) truncated at t's cap; s = +1 or -1.
template <class S>
GradedElement<S> exp_ad(const GradedElement<S>& h, const GradedElement<S>& t, const FiberForm<S>& w, int s);

} // namespace fedq
