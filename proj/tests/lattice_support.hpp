#pragma once

#include "fedq/lattice.hpp"

#include <random>

namespace fedq::test {

// M = 8, Nt = 64 with a bump coupling confined to the middle half.
inline LatticeModel desk_model(double amplitude = 1.0)
{
    BumpProfile b;
    b.t_center = 8.0;
    b.t_width = 3.5;
    b.x_center = 3.5;
    b.x_width = 3.0;
    b.amplitude = amplitude;
    return LatticeModel::make(8, 1.0, 0.25, 64, 1.0, b);
}

inline Vec random_vec(int n, std::mt19937_64& rng, double scale = 1.0)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

inline FieldHistory random_background(const LatticeModel& md, std::mt19937_64& rng, double scale = 1.0)
{
    return solve_nonlinear(md, random_vec(md.M, rng, scale), random_vec(md.M, rng, scale));
}

inline FieldHistory random_solution(const LatticeModel& md, const FieldHistory& phi, std::mt19937_64& rng)
{
    return solve_linearized(md, phi, random_vec(md.M, rng), random_vec(md.M, rng));
}

// Test function supported on the slices [t0, t1).
inline Vec random_test_function(const LatticeModel& md, int t0, int t1, std::mt19937_64& rng)
{
    Vec f = Vec::Zero(md.sites());
    f.segment(std::size_t(t0) * md.M, std::size_t(t1 - t0) * md.M) = random_vec((t1 - t0) * md.M, rng);
    return f;
}

} // namespace fedq::test
