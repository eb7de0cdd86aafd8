#include "spectralseq/solvers.hpp"

#include <cmath>
#include <numbers>

#include "spectralseq/errors.hpp"
#include "spectralseq/fft.hpp"

namespace spectralseq {

namespace {

constexpr double kPi = std::numbers::pi;

double signed_mode(std::size_t m, std::size_t n) {
    return m <= n / 2 ? double(m) : double(m) - double(n);
}

void check_field(const Tensor& u, const GridCoords& g, const char* what) {
    if (u.rank() != 2 || u.dim(0) != g.nx || u.dim(1) != g.ny)
        throw ShapeError(std::string(what) + ": field " + u.shape_str() + " does not match grid " +
                         std::to_string(g.nx) + "x" + std::to_string(g.ny));
}

/// Physical wavenumbers 2 pi m / L along each axis.
struct Wavenumbers {
    std::vector<double> kx, ky;

    Wavenumbers(const GridCoords& g, std::size_t kyr) : kx(g.nx), ky(kyr) {
        double lx = g.x1 - g.x0, ly = g.y1 - g.y0;
        for (std::size_t m = 0; m < g.nx; ++m) kx[m] = 2.0 * kPi * signed_mode(m, g.nx) / lx;
        for (std::size_t m = 0; m < kyr; ++m) ky[m] = 2.0 * kPi * double(m) / ly;
    }
};

Tensor laplacian(const Tensor& u, const GridCoords& g) {
    Spectrum s = rfft2(u);
    Wavenumbers k(g, s.dim(1));
    for (std::size_t i = 0; i < g.nx; ++i)
        for (std::size_t j = 0; j < s.dim(1); ++j)
            s(i, j) *= -(k.kx[i] * k.kx[i] + k.ky[j] * k.ky[j]);
    return irfft2(s, g.ny);
}

double grad_sq_sum(const Tensor& u, const GridCoords& g) {
    Spectrum s = rfft2(u);
    std::size_t kyr = s.dim(1);
    Wavenumbers k(g, kyr);
    Spectrum sx({g.nx, kyr}), sy({g.nx, kyr});
    for (std::size_t i = 0; i < g.nx; ++i)
        for (std::size_t j = 0; j < kyr; ++j) {
            std::complex<double> im(0.0, 1.0);
            sx(i, j) = im * k.kx[i] * s(i, j);
            sy(i, j) = im * k.ky[j] * s(i, j);
        }
    Tensor ux = irfft2(sx, g.ny), uy = irfft2(sy, g.ny);
    double e = 0.0;
    for (std::size_t q = 0; q < ux.size(); ++q) e += ux[q] * ux[q] + uy[q] * uy[q];
    return e;
}

double wave_lambda_max(double nu, const GridCoords& g) {
    double kx = 2.0 * kPi * double(g.nx / 2) / (g.x1 - g.x0);
    double ky = 2.0 * kPi * double(g.ny / 2) / (g.y1 - g.y0);
    return nu * (kx * kx + ky * ky);
}

} // namespace

Tensor lhs_sample(std::size_t n, const std::vector<std::pair<double, double>>& ranges,
                  std::uint64_t seed) {
    if (n < 1) throw ConfigError("lhs needs n >= 1");
    if (ranges.empty()) throw ConfigError("lhs needs at least one parameter range");
    for (const auto& [lo, hi] : ranges)
        if (!(lo < hi))
            throw ConfigError("degenerate lhs interval [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
    Rng rng(seed);
    Tensor out({n, ranges.size()});
    std::vector<std::size_t> strata(n);
    for (std::size_t j = 0; j < ranges.size(); ++j) {
        for (std::size_t i = 0; i < n; ++i) strata[i] = i;
        rng.shuffle(strata);
        auto [lo, hi] = ranges[j];
        double w = (hi - lo) / double(n);
        for (std::size_t i = 0; i < n; ++i)
            out(i, j) = lo + (double(strata[i]) + rng.uniform()) * w;
    }
    return out;
}

Tensor wave_initial_condition(const WaveIc& ic, const GridCoords& grid) {
    Tensor u({grid.nx, grid.ny});
    for (std::size_t i = 0; i < grid.nx; ++i)
        for (std::size_t j = 0; j < grid.ny; ++j) {
            double dx = grid.solver_x(i) - ic.b;
            double dy = grid.solver_y(j) - ic.c;
            u(i, j) = std::exp(-ic.a * (dx * dx + dy * dy));
        }
    return u;
}

std::pair<Tensor, Tensor> wave_leapfrog(const Tensor& u_prev, const Tensor& u_cur, double nu,
                                        const GridCoords& grid, double dt, std::size_t n_steps) {
    check_field(u_prev, grid, "wave_leapfrog");
    check_field(u_cur, grid, "wave_leapfrog");
    Tensor prev = u_prev, cur = u_cur;
    for (std::size_t s = 0; s < n_steps; ++s) {
        Tensor lap = laplacian(cur, grid);
        Tensor next = cur;
        for (std::size_t q = 0; q < next.size(); ++q)
            next[q] = 2.0 * cur[q] - prev[q] + dt * dt * nu * lap[q];
        prev = std::move(cur);
        cur = std::move(next);
    }
    return {std::move(prev), std::move(cur)};
}

WaveResult solve_wave(const Tensor& u0, double nu, const GridCoords& grid, double t_end,
                      std::size_t n_save, double dt) {
    check_field(u0, grid, "solve_wave");
    if (nu < 0.0) throw ConfigError("wave coefficient nu must be >= 0");
    if (n_save < 2) throw ConfigError("need n_save >= 2");
    if (t_end <= 0.0) throw ConfigError("t_end must be > 0");

    double lam = wave_lambda_max(nu, grid);
    double dt_bound = lam > 0.0 ? 2.0 / std::sqrt(lam) : 0.0;
    std::size_t n_intervals = n_save - 1;
    double interval = t_end / double(n_intervals);
    std::size_t spi;
    if (dt == 0.0) {
        spi = lam > 0.0 ? std::size_t(std::ceil(interval / (0.5 * dt_bound) - 1e-12)) : 1;
        dt = interval / double(spi);
    } else {
        if (dt < 0.0) throw ConfigError("dt must be positive");
        if (lam > 0.0 && dt > dt_bound)
            throw ConfigError("dt " + std::to_string(dt) + " violates the leapfrog bound " +
                              std::to_string(dt_bound));
        double ratio = interval / dt;
        spi = std::size_t(std::llround(ratio));
        if (spi == 0 || std::abs(ratio - double(spi)) > 1e-9 * ratio)
            throw ConfigError("dt must divide the save interval evenly");
        dt = interval / double(spi);
    }
    std::size_t n_steps = spi * n_intervals;

    WaveResult res;
    res.frames = Tensor({n_save, grid.nx, grid.ny});
    std::size_t plane = grid.nx * grid.ny;
    auto store = [&](std::size_t j, const Tensor& u) {
        for (std::size_t q = 0; q < plane; ++q) res.frames[j * plane + q] = u[q];
    };

    store(0, u0);
    res.energy.push_back(nu * grad_sq_sum(u0, grid)); // u_t(0) = 0

    Tensor prev = u0;
    Tensor lap0 = laplacian(u0, grid);
    Tensor cur = u0;
    for (std::size_t q = 0; q < plane; ++q) cur[q] += 0.5 * dt * dt * nu * lap0[q];

    for (std::size_t k = 1; k <= n_steps; ++k) {
        Tensor lap = laplacian(cur, grid);
        Tensor next = cur;
        for (std::size_t q = 0; q < plane; ++q)
            next[q] = 2.0 * cur[q] - prev[q] + dt * dt * nu * lap[q];
        if (k % spi == 0) {
            store(k / spi, cur);
            double e = nu * grad_sq_sum(cur, grid);
            for (std::size_t q = 0; q < plane; ++q) {
                double ut = (next[q] - prev[q]) / (2.0 * dt);
                e += ut * ut;
            }
            res.energy.push_back(e);
        }
        prev = std::move(cur);
        cur = std::move(next);
    }
    return res;
}

Tensor gaussian_random_field(const GridCoords& grid, double alpha, double tau, Rng& rng) {
    if (alpha <= 1.0) throw ConfigError("grf needs alpha > 1");
    if (tau <= 0.0) throw ConfigError("grf needs tau > 0");
    std::size_t nx = grid.nx, ny = grid.ny, kyr = ny / 2 + 1;
    double sigma = std::pow(tau, alpha - 1.0);
    double amp = double(nx * ny) * std::sqrt(2.0) * sigma;
    Spectrum s({nx, kyr});
    for (std::size_t m1 = 0; m1 <= nx / 2; ++m1)
        for (std::size_t m2 = 0; m2 < kyr; ++m2) {
            double re = rng.normal(), im = rng.normal();
            double sm = signed_mode(m1, nx);
            double k2 = 4.0 * kPi * kPi * (sm * sm + double(m2) * double(m2));
            double scale = amp * std::pow(k2 + tau * tau, -alpha / 2.0);
            bool self_col = m2 == 0 || (ny % 2 == 0 && m2 == ny / 2);
            bool self_row = m1 == 0 || (nx % 2 == 0 && m1 == nx / 2);
            if (self_col && self_row)
                s(m1, m2) = std::complex<double>(re * scale, 0.0);
            else
                s(m1, m2) = std::complex<double>(re * scale, im * scale);
            if (self_col && !self_row) s(nx - m1, m2) = std::conj(s(m1, m2));
        }
    s(std::size_t{0}, std::size_t{0}) = 0.0;
    return irfft2(s, ny);
}

Tensor ns_forcing(const GridCoords& grid) {
    Tensor f({grid.nx, grid.ny});
    for (std::size_t i = 0; i < grid.nx; ++i)
        for (std::size_t j = 0; j < grid.ny; ++j) {
            double p = 2.0 * kPi * (grid.solver_x(i) + grid.solver_y(j));
            f(i, j) = 0.1 * (std::sin(p) + std::cos(p));
        }
    return f;
}

Tensor solve_navier_stokes(const Tensor& w0, const Tensor& forcing, double nu,
                           const GridCoords& grid, double t_end, std::size_t n_save, double dt) {
    check_field(w0, grid, "solve_navier_stokes");
    check_field(forcing, grid, "solve_navier_stokes forcing");
    if (nu <= 0.0) throw ConfigError("viscosity must be > 0");
    if (n_save < 2) throw ConfigError("need n_save >= 2");
    if (t_end <= 0.0 || dt <= 0.0) throw ConfigError("t_end and dt must be > 0");

    std::size_t nx = grid.nx, ny = grid.ny, kyr = ny / 2 + 1;
    std::size_t n_intervals = n_save - 1;
    double interval = t_end / double(n_intervals);
    std::size_t spi = std::size_t(std::ceil(interval / dt - 1e-12));
    dt = interval / double(spi);
    std::size_t n_steps = spi * n_intervals;

    Wavenumbers k(grid, kyr);
    std::vector<double> lap(nx * kyr), cn_num(nx * kyr), cn_den(nx * kyr);
    std::vector<char> keep(nx * kyr);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < kyr; ++j) {
            std::size_t q = i * kyr + j;
            lap[q] = k.kx[i] * k.kx[i] + k.ky[j] * k.ky[j];
            cn_num[q] = 1.0 - 0.5 * dt * nu * lap[q];
            cn_den[q] = 1.0 + 0.5 * dt * nu * lap[q];
            keep[q] = std::abs(signed_mode(i, nx)) <= double(nx) / 3.0 &&
                      double(j) <= double(ny) / 3.0;
        }

    Spectrum fh = rfft2(forcing);
    fh(std::size_t{0}, std::size_t{0}) = 0.0;
    Spectrum wh = rfft2(w0);

    Tensor frames({n_save, nx, ny});
    std::size_t plane = nx * ny;
    auto store = [&](std::size_t fj, std::size_t step) {
        Tensor w = irfft2(wh, ny);
        for (std::size_t q = 0; q < plane; ++q) {
            if (!std::isfinite(w[q]))
                throw NumericsError("navier-stokes diverged at step " + std::to_string(step));
            frames[fj * plane + q] = w[q];
        }
    };
    store(0, 0);

    Spectrum uh({nx, kyr}), vh({nx, kyr}), wxh({nx, kyr}), wyh({nx, kyr});
    const std::complex<double> im(0.0, 1.0);
    for (std::size_t step = 1; step <= n_steps; ++step) {
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < kyr; ++j) {
                std::size_t q = i * kyr + j;
                std::complex<double> psi = lap[q] > 0.0 ? wh[q] / lap[q]
                                                        : std::complex<double>(0.0, 0.0);
                uh[q] = im * k.ky[j] * psi;
                vh[q] = -im * k.kx[i] * psi;
                wxh[q] = im * k.kx[i] * wh[q];
                wyh[q] = im * k.ky[j] * wh[q];
            }
        Tensor u = irfft2(uh, ny), v = irfft2(vh, ny);
        Tensor wx = irfft2(wxh, ny), wy = irfft2(wyh, ny);
        Tensor nl({nx, ny});
        for (std::size_t q = 0; q < plane; ++q) nl[q] = u[q] * wx[q] + v[q] * wy[q];
        Spectrum nh = rfft2(nl);
        nh(std::size_t{0}, std::size_t{0}) = 0.0;
        for (std::size_t q = 0; q < nx * kyr; ++q) {
            if (!keep[q]) nh[q] = 0.0;
            wh[q] = (cn_num[q] * wh[q] + dt * (fh[q] - nh[q])) / cn_den[q];
        }
        if (!std::isfinite(wh[1].real()))
            throw NumericsError("navier-stokes diverged at step " + std::to_string(step));
        if (step % spi == 0) store(step / spi, step);
    }
    return frames;
}

} // namespace spectralseq
