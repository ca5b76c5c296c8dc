#pragma once

#include "fedq/lattice.hpp"

#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace fedq {

// One (hbar power, rank) component. Rank 0 uses `scalar`, rank 2 the symmetric
// `mat`; rank 1 and rank >= 3 use `vec` as per-site weights of :phi_x^n:.
struct WickComponent {
    cplx scalar{};
    CVec vec;
    CMat mat;
};

// Element of the finite Wick algebra over a background, in sum form:
// sum_p hbar^p sum c_{i1..in} :phi_i1 ... phi_in:. Contractions phi_i phi_j -> hbar Omega_ij.
// Ranks >= 3 are kept only when local; products that would create nonlocal
// higher-rank terms drop them and set `lossy`.
struct LatticeWickElement {
    FieldHistory phi;
    int sites = 0;
    int cap = 6; // Deg = 2p + n
    std::map<std::pair<int, int>, WickComponent> comps;
    bool lossy = false;

    LatticeWickElement() = default;
    LatticeWickElement(FieldHistory background, int cap = 6);

    static LatticeWickElement unit(const FieldHistory& background, int cap = 6);

    void add_scalar(int p, cplx v);
    void add_vector(int p, const CVec& c);
    void add_matrix(int p, const CMat& s); // symmetrised on insertion
    // Site-local rank-n term sum_x g_x :phi_x^n:, any n >= 0.
    void add_local(int p, int n, const CVec& g);

    bool has(int p, int n) const { return comps.count({p, n}) != 0; }
    LatticeWickElement scaled(cplx s) const;
    // Keeps ranks <= n_max and hbar powers <= p_max.
    LatticeWickElement truncated(int n_max, int p_max) const;
    double max_abs() const;

    friend LatticeWickElement operator+(const LatticeWickElement& a, const LatticeWickElement& b);
    friend LatticeWickElement operator-(const LatticeWickElement& a, const LatticeWickElement& b);
};

LatticeWickElement wick_mul_lattice(const LatticeWickElement& a, const LatticeWickElement& b, const CMat& omega);
LatticeWickElement wick_commutator(const LatticeWickElement& a, const LatticeWickElement& b, const CMat& omega);
// Multiplies by i/hbar; throws AlgebraError if an hbar^0 component is present.
LatticeWickElement times_i_over_hbar(const LatticeWickElement& a);

// <u, delta/delta phi>: contracts one slot with u.
LatticeWickElement field_derivative(const LatticeWickElement& a, const FieldHistory& u);

// Components in early Cauchy-data coordinates: c -> T^T c on every slot.
// Rank-n tensors are stored dense over (2M)^n indices.
struct ReducedForm {
    int dim = 0;
    std::map<std::pair<int, int>, std::vector<cplx>> comps;
};

ReducedForm reduce(const LatticeWickElement& a, const Mat& T, int max_rank = 4);
// Sup-norm difference of the reduced forms (ranks <= max_rank); both elements must share the background.
double equiv_compare(const LatticeModel& model, const LatticeWickElement& a, const LatticeWickElement& b,
                     int max_rank = 4);

// Slotwise projection onto the solution classes: Pi = Sc E_phi (sum form), Pi^2 = Pi.
Mat solution_projection(const LatticeModel& model, const FieldHistory& phi);
// Applies a coefficient map slotwise to ranks <= 2; local ranks >= 3 are dropped (lossy).
LatticeWickElement map_slots(const LatticeWickElement& a, const Mat& A, const FieldHistory& target);

struct RetardedMap {
    FieldHistory phi, phi_prime;
    Mat AR; // solutions of P_phi -> solutions of P_phi' with the same early data
    Mat A;  // coefficient map W_phi -> W_phi'
};

RetardedMap alpha_R(const LatticeModel& model, const FieldHistory& phi, const FieldHistory& phi_prime);
LatticeWickElement apply(const RetardedMap& alpha, const LatticeWickElement& a);

// sum_x w weight_x Phi_x^power, a functional of the full field Phi = phi + varphi.
struct LocalTerm {
    int power = 1;
    Vec weight;
};
using LocalFunctional = std::vector<LocalTerm>;

// sum_x sum_n g_n(x) :varphi_x^n:
struct LocalPoly {
    std::map<int, CVec> g;
};

LocalPoly expand(const LatticeModel& model, const LocalFunctional& F, const FieldHistory& phi);
// Part of the action at phi + varphi beyond quadratic order: sum w lam (phi varphi^3/3! + varphi^4/4!).
LocalPoly interaction_part(const LatticeModel& model, const FieldHistory& phi);
LatticeWickElement to_element(const LocalPoly& F, const FieldHistory& phi, int cap = 6);

// R_1(F; V) = (i/hbar) sum_{x,y} theta(x0 - y0) [F(x), V(y)].
LatticeWickElement retarded_product_1(const LatticeModel& model, const FieldHistory& phi, const LocalPoly& F,
                                      const LocalPoly& V, int order = 1);

struct HaagParts {
    LatticeWickElement order0; // F(phi + varphi)
    LatticeWickElement order1; // R_1(F; V_phi)
    LatticeWickElement sum() const { return order0 + order1; }
};
HaagParts haag_parts(const LatticeModel& model, const FieldHistory& phi, const LocalFunctional& F, int order = 1);
LatticeWickElement haag_series(const LatticeModel& model, const FieldHistory& phi, const LocalFunctional& F, int order = 1);

using Section = std::function<LatticeWickElement(const FieldHistory&)>;

struct ConnectionResult {
    LatticeWickElement value;
    double error_estimate = 0;
};

// d/de alpha^R_{phi(e), phi} t_{phi(e)}, phi(e) the nonlinear solution with early data rho(phi) + e rho(u).
// Central differences at e in {1, 1/2, 1/4} * 1e-2 / max abs(rho(u)), two Richardson levels.
ConnectionResult retarded_connection(const LatticeModel& model, const FieldHistory& phi, const FieldHistory& u,
                                     const Section& t, double tol = 1e-7);

// Sup-norm of (nabla^R_u - <u, delta/delta varphi>) F-hat over ranks <= 2, hbar <= 1.
double check_fedosov_per(const LatticeModel& model, const FieldHistory& phi, const FieldHistory& u,
                         const LocalFunctional& F);

// [F1-hat, F2-hat] truncated at first order in lambda, as an equiv_compare residual against 0.
double causality_residual(const LatticeModel& model, const FieldHistory& phi, const LocalFunctional& F1,
                          const LocalFunctional& F2);

} // namespace fedq
