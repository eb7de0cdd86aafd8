#pragma once

#include <cstddef>

#include "spectralseq/tensor.hpp"

namespace spectralseq {

/// Uniform 2D grid with periodic topology.
///
/// Two coordinate conventions coexist on purpose: the PDE solvers sample
/// at x0 + i*L/n (endpoint excluded, the periodic collocation points),
/// while the models' coordinate channels use an inclusive linspace so the
/// channels span the full domain exactly.
struct GridCoords {
    std::size_t nx = 0, ny = 0;
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

    double solver_dx() const { return (x1 - x0) / double(nx); }
    double solver_dy() const { return (y1 - y0) / double(ny); }
    double solver_x(std::size_t i) const { return x0 + double(i) * solver_dx(); }
    double solver_y(std::size_t j) const { return y0 + double(j) * solver_dy(); }

    double model_x(std::size_t i) const {
        return nx > 1 ? x0 + double(i) * (x1 - x0) / double(nx - 1) : x0;
    }
    double model_y(std::size_t j) const {
        return ny > 1 ? y0 + double(j) * (y1 - y0) / double(ny - 1) : y0;
    }

    /// (batch, nx, ny, 2) tensor of model coordinates, channel 0 = x, 1 = y.
    Tensor coord_channels(std::size_t batch) const {
        Tensor c({batch, nx, ny, 2});
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t i = 0; i < nx; ++i)
                for (std::size_t j = 0; j < ny; ++j) {
                    c(b, i, j, std::size_t{0}) = model_x(i);
                    c(b, i, j, std::size_t{1}) = model_y(j);
                }
        return c;
    }
};

} // namespace spectralseq
