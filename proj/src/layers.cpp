#include "spectralseq/layers.hpp"

namespace spectralseq {

int spectral_conv(Graph& g, int x, int r, std::size_t m1, std::size_t m2) {
    std::size_t ny = g.value(x).dim(2);
    int xh = g.rfft2(x);
    int yh = g.mode_mul(xh, r, m1, m2);
    return g.irfft2(yh, ny);
}

int fourier_layer(Graph& g, int x, int r, int w, int b, std::size_t m1, std::size_t m2,
                  kernels::Act act) {
    int sc = spectral_conv(g, x, r, m1, m2);
    int pw = g.pointwise_linear(x, w, b);
    return g.activation(g.addn({sc, pw}), act);
}

CellOut rnn_cell_step(Graph& g, int x, int h_prev, int wx, int bx, int wh, int bh,
                      kernels::Act act) {
    require_same_shape(g.value(x), g.value(h_prev), "rnn_cell_step: x vs h_prev");
    int px = g.pointwise_linear(x, wx, bx);
    int ph = g.pointwise_linear(h_prev, wh, bh);
    int h = g.addn({px, ph});
    return {h, g.activation(h, act)};
}

CellOut frnn_cell_step(Graph& g, int x, int h_prev, int rx, int rh, int wx, int bx, int wh,
                       int bh, std::size_t m1, std::size_t m2, kernels::Act act) {
    require_same_shape(g.value(x), g.value(h_prev), "frnn_cell_step: x vs h_prev");
    int sx = spectral_conv(g, x, rx, m1, m2);
    int px = g.pointwise_linear(x, wx, bx);
    int sh = spectral_conv(g, h_prev, rh, m1, m2);
    int ph = g.pointwise_linear(h_prev, wh, bh);
    int h = g.addn({sx, px, sh, ph});
    return {h, g.activation(h, act)};
}

Tensor init_hidden(const Tensor& u_window, std::size_t hidden_channels, const GridCoords& grid) {
    if (hidden_channels < 3)
        throw ConfigError("init_hidden: hidden_channels must be >= 3, got " +
                          std::to_string(hidden_channels));
    if (u_window.rank() != 4) throw ShapeError("init_hidden: window must be rank 4");
    std::size_t batch = u_window.dim(0), nx = u_window.dim(1), ny = u_window.dim(2);
    std::size_t t = u_window.dim(3);
    if (nx != grid.nx || ny != grid.ny)
        throw ShapeError("init_hidden: window grid " + u_window.shape_str() +
                         " does not match coordinate grid");
    Tensor h({batch, nx, ny, hidden_channels});
    std::size_t field_ch = hidden_channels - 2;
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j) {
                double u0 = u_window[((b * nx + i) * ny + j) * t];
                for (std::size_t c = 0; c < field_ch; ++c) h(b, i, j, c) = u0;
                h(b, i, j, field_ch) = grid.model_x(i);
                h(b, i, j, field_ch + 1) = grid.model_y(j);
            }
    return h;
}

} // namespace spectralseq
