#pragma once

#include "fedq/graded.hpp"

#include <utility>
#include <vector>

namespace fedq {

// Rank-3 tensors X^k_{ij} are stored flat at (k*n + i)*n + j, rank-4 tensors
// R^i_{jkl} at ((i*n + j)*n + k)*n + l, matrices M_{ij} / M^i_j at i*n + j.
template <class S>
using Rank3 = std::vector<Jet<S>>;
template <class S>
using Rank4 = std::vector<Jet<S>>;

inline std::size_t idx3(int n, int k, int i, int j) { return (std::size_t(k) * n + i) * n + j; }
inline std::size_t idx4(int n, int i, int j, int k, int l) { return ((std::size_t(i) * n + j) * n + k) * n + l; }

template <class S>
struct ChartGeometry {
    int dim = 0;
    int jet_order = 0;
    int cap = 0;
    JetMatrix<S> sigma;     // sigma_{ij}, constant
    JetMatrix<S> sigma_inv; // sigma^{ij}
    JetMatrix<S> metric;    // G_{ij}
    JetMatrix<S> metric_inv;
    JetMatrix<S> acs;       // J^i_j
    FiberForm<S> omega;
    Rank3<S> lc;
    Rank3<S> nijenhuis;
    Rank3<S> yano;
    Rank3<S> torsion;
    Rank4<S> curvature;
    GradedElement<S> t_hat;
    GradedElement<S> r_hat;
};

// J = A (-A^2)^{-1/2} with A = seed^{-1} sigma; G_{ij} = J^k_i sigma_{kj}.
template <class S>
std::pair<JetMatrix<S>, JetMatrix<S>> compatible_triple(const JetMatrix<S>& sigma, const JetMatrix<S>& seed, int n);

template <class S>
Rank3<S> levi_civita(const JetMatrix<S>& g, const JetMatrix<S>& g_inv, int n);
template <class S>
Rank3<S> nijenhuis(const JetMatrix<S>& acs, int n);
template <class S>
Rank3<S> yano(const Rank3<S>& lc, const Rank3<S>& nij, const JetMatrix<S>& g, const JetMatrix<S>& g_inv, int n);
template <class S>
std::pair<Rank3<S>, Rank4<S>> torsion_curvature(const Rank3<S>& gamma, int n);
template <class S>
std::pair<GradedElement<S>, GradedElement<S>> hat_tensors(const JetMatrix<S>& sigma, const Rank3<S>& torsion,
                                                           const Rank4<S>& curvature, int n, int cap);

enum class MetricInput { Seed, Direct };

// Assembles every derived field of a Darboux chart.
template <class S>
ChartGeometry<S> build_chart(const JetMatrix<S>& sigma, const JetMatrix<S>& metric, MetricInput kind, int cap);

// The constant standard chart: sigma in Darboux normal form, G = id.
template <class S>
ChartGeometry<S> flat_chart(int dim, int jet_order, int cap);

// Lifted connection on W-valued forms; only outputs with Deg <= out_cap are formed.
template <class S>
GradedElement<S> nabla(const GradedElement<S>& a, const ChartGeometry<S>& geom, int out_cap);
template <class S>
GradedElement<S> nabla(const GradedElement<S>& a, const ChartGeometry<S>& geom)
{
    return nabla(a, geom, a.cap());
}
// Same with an explicit Christoffel array (used for gauge comparisons).
template <class S>
GradedElement<S> nabla_with(const GradedElement<S>& a, const Rank3<S>& gamma, int out_cap);

// Standard Darboux form: sigma_{2a,2a+1} = -1, sigma_{2a+1,2a} = 1.
template <class S>
JetMatrix<S> standard_sigma(int dim, int jet_order);

// Residual helpers used by tests and the verification suite.
template <class S>
JetMatrix<S> nabla_sigma_residual(const ChartGeometry<S>& g); // entries (k*n+i)*n+j flattened into n^3 jets
template <class S>
std::vector<Jet<S>> nabla_metric_residual(const ChartGeometry<S>& g);

} // namespace fedq
