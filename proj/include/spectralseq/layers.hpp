#pragma once

#include "spectralseq/autograd.hpp"
#include "spectralseq/grid.hpp"

namespace spectralseq {

/// y = irfft2(R (.) rfft2(x)) on the retained low modes; everything else
/// zeroed. r is the (2, m1, m2, c_in, c_out, 2) spectral weight node.
int spectral_conv(Graph& g, int x, int r, std::size_t m1, std::size_t m2);

/// y = act(spectral_conv(x, r) + W x + b)
int fourier_layer(Graph& g, int x, int r, int w, int b, std::size_t m1, std::size_t m2,
                  kernels::Act act);

struct CellOut {
    int h;
    int y;
};

/// h_t = Wx x_t + Wh h_prev (+ biases); y_t = act(h_t).
/// The pre-activation h_t is what the next step consumes.
CellOut rnn_cell_step(Graph& g, int x, int h_prev, int wx, int bx, int wh, int bh,
                      kernels::Act act);

/// h_t = spectral_conv(x_t, Rx) + Wx x_t + spectral_conv(h_prev, Rh) + Wh h_prev;
/// y_t = act(h_t).
CellOut frnn_cell_step(Graph& g, int x, int h_prev, int rx, int rh, int wx, int bx, int wh,
                       int bh, std::size_t m1, std::size_t m2, kernels::Act act);

/// Initial hidden state: channels [0, hidden-2) hold the first frame of the
/// window tiled cyclically, the last two hold the x and y coordinate grids.
Tensor init_hidden(const Tensor& u_window, std::size_t hidden_channels, const GridCoords& grid);

} // namespace spectralseq
