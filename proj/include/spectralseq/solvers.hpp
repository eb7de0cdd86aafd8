#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spectralseq/grid.hpp"
#include "spectralseq/rng.hpp"
#include "spectralseq/tensor.hpp"

namespace spectralseq {

/// Latin hypercube design: (n, d) samples, one per equal-width stratum per
/// parameter, strata paired by independent random permutations.
Tensor lhs_sample(std::size_t n, const std::vector<std::pair<double, double>>& ranges,
                  std::uint64_t seed);

struct WaveIc {
    double a = 10.0; // inverse squared width
    double b = 0.0;  // center x
    double c = 0.0;  // center y
};

/// u0(x, y) = exp(-a ((x - b)^2 + (y - c)^2)) on the solver collocation grid.
Tensor wave_initial_condition(const WaveIc& ic, const GridCoords& grid);

struct WaveResult {
    Tensor frames;               // (n_save, nx, ny), t uniform on [0, T]
    std::vector<double> energy;  // sum(u_t^2 + nu |grad u|^2) at each saved frame
};

/// u_tt = nu lap(u), u_t(0) = 0, periodic. Leapfrog in time, Fourier
/// spectral Laplacian in space. dt == 0 picks the largest stable step
/// (safety 0.5) that lands saves exactly; an explicit dt must satisfy the
/// stability bound and divide the save interval.
WaveResult solve_wave(const Tensor& u0, double nu, const GridCoords& grid, double t_end,
                      std::size_t n_save, double dt = 0.0);

/// One leapfrog segment from the state pair (u_prev, u_cur). Running it on
/// the reversed pair walks the same trajectory backwards, which is the
/// time-reversibility handle the tests use.
std::pair<Tensor, Tensor> wave_leapfrog(const Tensor& u_prev, const Tensor& u_cur, double nu,
                                        const GridCoords& grid, double dt, std::size_t n_steps);

/// Zero-mean sample of N(0, (-lap + tau^2 I)^{-alpha}) on a periodic grid.
Tensor gaussian_random_field(const GridCoords& grid, double alpha, double tau, Rng& rng);

/// 0.1 (sin(2 pi (x + y)) + cos(2 pi (x + y))) on the solver grid.
Tensor ns_forcing(const GridCoords& grid);

/// 2D incompressible Navier-Stokes in vorticity form, pseudo-spectral:
/// streamfunction velocity, 2/3-dealiased advection (explicit Euler),
/// Crank-Nicolson viscosity. Returns (n_save, nx, ny) on t in [0, T].
Tensor solve_navier_stokes(const Tensor& w0, const Tensor& forcing, double nu,
                           const GridCoords& grid, double t_end, std::size_t n_save, double dt);

} // namespace spectralseq
