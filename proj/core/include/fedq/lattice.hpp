#pragma once

#include "fedq/jet.hpp"
#include "fedq/tensor_jet.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <complex>
#include <utility>
#include <vector>

namespace fedq {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

struct BumpProfile {
    double t_center = 0, t_width = 1;
    double x_center = 0, x_width = 1;
    double amplitude = 0;
};

// Periodic 1-D lattice, discrete time. Site index i = t*M + x.
struct LatticeModel {
    int M = 8;
    double a = 1.0;
    double dt = 0.25;
    int Nt = 64;
    double m = 1.0;
    Vec lam; // lambda(t, x), size Nt*M

    int sites() const { return Nt * M; }
    int idx(int t, int x) const { return t * M + x; }
    double w() const { return a * dt; }

    double omega_k(int k) const;
    double omega_max() const;
    // Throws StabilityError when dt * omega_max >= 2.
    void check_stability() const;
    // Throws ConfigError unless lambda vanishes on the first and last quarter of the grid.
    void check_coupling() const;
    bool coupling_vanishes_at(int t) const;

    static LatticeModel make(int M, double a, double dt, int Nt, double m, const BumpProfile& bump);
    static LatticeModel from_json(const nlohmann::json& j);
};

// exp(1 - 1/(1 - s^2)) on |s| < 1, so bump(0) = 1.
double bump(double s);

// Nt x M history flattened like the sites.
using FieldHistory = Vec;

// phi_{t+1} = 2 phi_t - phi_{t-1} + dt^2 (Lap phi_t - m^2 phi_t - lam_t phi_t^3 / 3!),
// phi_0 = q, phi_1 = q + dt p.
FieldHistory solve_nonlinear(const LatticeModel& model, const Vec& q, const Vec& p);
// Same recursion run backwards from the last two slices: phi_{Nt-2} = q, phi_{Nt-1} = q + dt p.
FieldHistory solve_nonlinear_backward(const LatticeModel& model, const Vec& q, const Vec& p);
// Linear leapfrog with potential m^2 + lam phi^2 / 2.
FieldHistory solve_linearized(const LatticeModel& model, const FieldHistory& phi, const Vec& q, const Vec& p);
FieldHistory solve_linearized_backward(const LatticeModel& model, const FieldHistory& phi, const Vec& q, const Vec& p);

// Slices t, t+1 of a history as Cauchy data (q, p) with p = (u_{t+1} - u_t) / dt.
std::pair<Vec, Vec> cauchy_data(const LatticeModel& model, const FieldHistory& u, int t);

// v = lam phi^2 / 2 (zero vector for an empty phi).
Vec potential(const LatticeModel& model, const FieldHistory& phi);

// P_d = Box_d - m^2 - v with Box_d = -D_tt + Lap, Dirichlet rows at both temporal ends.
Mat kg_operator(const LatticeModel& model, const Vec& v);

// Kernels are stored so that (K h)_i = w sum_j K_ij h_j and <f, K h>_w = w^2 f^T K h.
// Retarded/advanced inverses satisfy P_d (w E) = Id on rows 1 .. Nt-2.
struct PropagatorSet {
    Mat EA, ER, E; // kernels
    Mat P;         // operator
};

PropagatorSet propagators(const LatticeModel& model, const FieldHistory& phi);

// Transfer matrix T (sites x 2M): history of the linearised solution from (q, p) at slices 0, 1.
Mat transfer(const LatticeModel& model, const FieldHistory& phi);

// 1 up to slice t0, 0 from slice t1 on, smooth in between.
Vec step_profile(const LatticeModel& model, int t0, int t1);
// Profiles switching off inside the coupling-free first / last quarter.
Vec early_cutoff(const LatticeModel& model);
Vec late_cutoff(const LatticeModel& model);

// Time step function for causal ordering; coincident slices get weight 1/2.
constexpr double kCoincidentStepWeight = 0.5;
inline double theta_step(int t1, int t2) { return t1 > t2 ? 1.0 : (t1 == t2 ? kCoincidentStepWeight : 0.0); }
// Bilinear form matrix: sigma(u, v) = u^T Sc v. Sc = P0 C - C P0 with C = diag(w c(t)).
Mat sigma_c_matrix(const LatticeModel& model, const Vec& c);
// a sum_x (u_t v_{t+1} - u_{t+1} v_t) / dt
double slice_symplectic(const LatticeModel& model, const FieldHistory& u, const FieldHistory& v, int t);

// Ground-state kernel of the free leapfrog map (Im omega0 = E0 / 2).
CMat ground_state(const LatticeModel& model);
// Two-point data of the ground state on (q, p) at slices 0, 1 in transfer() coordinates.
CMat ground_data(const LatticeModel& model);

// omega^R = T omega0|_{slices 0,1} T^T.
CMat retarded_state(const LatticeModel& model, const FieldHistory& phi);
// E_phi Sc+ E_phi- Sc- omega0 Sc- E_phi- Sc+ E_phi with phi- = chi phi.
CMat retarded_state_sandwich(const LatticeModel& model, const FieldHistory& phi, const Vec& c_minus, const Vec& c_plus,
                             const Vec& chi);

// Directional derivative of E^A along h: w E^A diag(lam phi h) E^A.
Mat var_EA_direction(const LatticeModel& model, const FieldHistory& phi, const Vec& h);
// Slice y of the rank-3 variation: column y of dE^A(x1, x2) / dphi(y), i.e. E^A(x1, y) lam phi(y) E^A(y, x2).
Mat var_EA_at(const LatticeModel& model, const FieldHistory& phi, int y);
// Richardson-extrapolated central difference of E^A along h; returns (estimate, error estimate).
std::pair<Mat, double> var_EA_fd(const LatticeModel& model, const FieldHistory& phi, const Vec& h, double eps);

// Chart along 2d linearised solutions, with their Cauchy data at the last two slices as coordinates.
struct LatticeChartJets {
    int dim = 0;
    Mat sigma_gram;           // u_i^T Sc u_j at the base point
    JetMatrix<cplx> sigma;    // constant
    JetMatrix<cplx> metric;   // G restricted to the chart directions
    double acs_residual = 0;  // |A^2 + 1| at the base, A = metric^{-1} sigma
};

LatticeChartJets geometry_jets(const LatticeModel& model, const FieldHistory& phi, const std::vector<FieldHistory>& basis,
                               int order, double h = 0.05);

} // namespace fedq
