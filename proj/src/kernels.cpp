#include "spectralseq/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace spectralseq::kernels {

namespace {
constexpr std::size_t kSumBlock = 4096;
}

void addn(const double* const* xs, std::size_t k, double* y, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < std::int64_t(n); ++i) {
        double acc = xs[0][i];
        for (std::size_t j = 1; j < k; ++j) acc += xs[j][i];
        y[i] = acc;
    }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < std::int64_t(n); ++i) y[i] += a * x[i];
}

void scale(double a, const double* x, double* y, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < std::int64_t(n); ++i) y[i] = a * x[i];
}

void activation_fw(Act act, const double* x, double* y, std::size_t n) {
    switch (act) {
        case Act::Identity:
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < std::int64_t(n); ++i) y[i] = x[i];
            break;
        case Act::Relu:
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < std::int64_t(n); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
            break;
        case Act::Tanh:
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < std::int64_t(n); ++i) y[i] = std::tanh(x[i]);
            break;
    }
}

void activation_bw(Act act, const double* y, const double* g, double* dx, std::size_t n) {
    switch (act) {
        case Act::Identity:
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < std::int64_t(n); ++i) dx[i] += g[i];
            break;
        case Act::Relu:
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < std::int64_t(n); ++i)
                if (y[i] > 0.0) dx[i] += g[i];
            break;
        case Act::Tanh:
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < std::int64_t(n); ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
            break;
    }
}

void pointwise_linear_fw(const double* x, const double* w, const double* b, double* y,
                         std::size_t p, std::size_t c_in, std::size_t c_out) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < std::int64_t(p); ++i) {
        const double* xi = x + std::size_t(i) * c_in;
        double* yi = y + std::size_t(i) * c_out;
        for (std::size_t co = 0; co < c_out; ++co) yi[co] = b[co];
        for (std::size_t ci = 0; ci < c_in; ++ci) {
            double xv = xi[ci];
            const double* wr = w + ci * c_out;
            for (std::size_t co = 0; co < c_out; ++co) yi[co] += xv * wr[co];
        }
    }
}

void pointwise_linear_bw_x(const double* g, const double* w, double* dx, std::size_t p,
                           std::size_t c_in, std::size_t c_out) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < std::int64_t(p); ++i) {
        const double* gi = g + std::size_t(i) * c_out;
        double* dxi = dx + std::size_t(i) * c_in;
        for (std::size_t ci = 0; ci < c_in; ++ci) {
            const double* wr = w + ci * c_out;
            double acc = 0.0;
            for (std::size_t co = 0; co < c_out; ++co) acc += gi[co] * wr[co];
            dxi[ci] += acc;
        }
    }
}

void pointwise_linear_bw_wb(const double* g, const double* x, double* dw, double* db,
                            std::size_t p, std::size_t c_in, std::size_t c_out) {
#pragma omp parallel for schedule(static)
    for (std::int64_t ci = 0; ci < std::int64_t(c_in); ++ci)
        for (std::size_t co = 0; co < c_out; ++co) {
            double acc = 0.0;
            for (std::size_t i = 0; i < p; ++i) acc += x[i * c_in + ci] * g[i * c_out + co];
            dw[std::size_t(ci) * c_out + co] += acc;
        }
#pragma omp parallel for schedule(static)
    for (std::int64_t co = 0; co < std::int64_t(c_out); ++co) {
        double acc = 0.0;
        for (std::size_t i = 0; i < p; ++i) acc += g[i * c_out + co];
        db[co] += acc;
    }
}

namespace {
inline std::size_t block_row(std::size_t blk, std::size_t i, std::size_t nx, std::size_t m1) {
    return blk == 0 ? i : nx - m1 + i;
}
} // namespace

void mode_mul_fw(const std::complex<double>* xh, const double* r, std::complex<double>* yh,
                 std::size_t batch, std::size_t nx, std::size_t kyr, std::size_t c_in,
                 std::size_t c_out, std::size_t m1, std::size_t m2) {
#pragma omp parallel for schedule(static)
    for (std::int64_t f = 0; f < std::int64_t(batch * nx * kyr); ++f) {
        std::complex<double>* yf = yh + std::size_t(f) * c_out;
        std::size_t kx = (std::size_t(f) / kyr) % nx;
        std::size_t ky = std::size_t(f) % kyr;
        std::size_t blk, i;
        if (kx < m1) {
            blk = 0;
            i = kx;
        } else if (kx >= nx - m1) {
            blk = 1;
            i = kx - (nx - m1);
        } else {
            for (std::size_t co = 0; co < c_out; ++co) yf[co] = {0.0, 0.0};
            continue;
        }
        if (ky >= m2) {
            for (std::size_t co = 0; co < c_out; ++co) yf[co] = {0.0, 0.0};
            continue;
        }
        const std::complex<double>* xf = xh + std::size_t(f) * c_in;
        const double* rm = r + (((blk * m1 + i) * m2 + ky) * c_in) * c_out * 2;
        for (std::size_t co = 0; co < c_out; ++co) {
            double yr = 0.0, yi = 0.0;
            for (std::size_t ci = 0; ci < c_in; ++ci) {
                double xr = xf[ci].real(), xi = xf[ci].imag();
                double rr = rm[(ci * c_out + co) * 2], rim = rm[(ci * c_out + co) * 2 + 1];
                yr += xr * rr - xi * rim;
                yi += xr * rim + xi * rr;
            }
            yf[co] = {yr, yi};
        }
    }
}

void mode_mul_bw_x(const std::complex<double>* g, const double* r, std::complex<double>* dxh,
                   std::size_t batch, std::size_t nx, std::size_t kyr, std::size_t c_in,
                   std::size_t c_out, std::size_t m1, std::size_t m2) {
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < std::int64_t(batch * 2 * m1 * m2); ++t) {
        std::size_t j = std::size_t(t) % m2;
        std::size_t i = (std::size_t(t) / m2) % m1;
        std::size_t blk = (std::size_t(t) / (m2 * m1)) % 2;
        std::size_t b = std::size_t(t) / (m2 * m1 * 2);
        std::size_t kx = block_row(blk, i, nx, m1);
        std::size_t f = (b * nx + kx) * kyr + j;
        const std::complex<double>* gf = g + f * c_out;
        std::complex<double>* dxf = dxh + f * c_in;
        const double* rm = r + (((blk * m1 + i) * m2 + j) * c_in) * c_out * 2;
        for (std::size_t ci = 0; ci < c_in; ++ci) {
            double ar = 0.0, ai = 0.0;
            for (std::size_t co = 0; co < c_out; ++co) {
                double gr = gf[co].real(), gi = gf[co].imag();
                double rr = rm[(ci * c_out + co) * 2], rim = rm[(ci * c_out + co) * 2 + 1];
                // g * conj(r)
                ar += gr * rr + gi * rim;
                ai += gi * rr - gr * rim;
            }
            dxf[ci] += std::complex<double>(ar, ai);
        }
    }
}

void mode_mul_bw_r(const std::complex<double>* g, const std::complex<double>* xh, double* dr,
                   std::size_t batch, std::size_t nx, std::size_t kyr, std::size_t c_in,
                   std::size_t c_out, std::size_t m1, std::size_t m2) {
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < std::int64_t(2 * m1 * m2 * c_in); ++t) {
        std::size_t ci = std::size_t(t) % c_in;
        std::size_t j = (std::size_t(t) / c_in) % m2;
        std::size_t i = (std::size_t(t) / (c_in * m2)) % m1;
        std::size_t blk = std::size_t(t) / (c_in * m2 * m1);
        std::size_t kx = block_row(blk, i, nx, m1);
        double* drm = dr + (((blk * m1 + i) * m2 + j) * c_in + ci) * c_out * 2;
        for (std::size_t co = 0; co < c_out; ++co) {
            double ar = 0.0, ai = 0.0;
            for (std::size_t b = 0; b < batch; ++b) {
                std::size_t f = (b * nx + kx) * kyr + j;
                double gr = g[f * c_out + co].real(), gi = g[f * c_out + co].imag();
                double xr = xh[f * c_in + ci].real(), xi = xh[f * c_in + ci].imag();
                // g * conj(x)
                ar += gr * xr + gi * xi;
                ai += gi * xr - gr * xi;
            }
            drm[co * 2] += ar;
            drm[co * 2 + 1] += ai;
        }
    }
}

void conv2d_fw(const double* x, const double* k, const double* b, double* y, const ConvDims& d) {
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < std::int64_t(d.batch * d.h_out * d.w_out); ++t) {
        std::size_t ow = std::size_t(t) % d.w_out;
        std::size_t oh = (std::size_t(t) / d.w_out) % d.h_out;
        std::size_t bb = std::size_t(t) / (d.w_out * d.h_out);
        double* yo = y + std::size_t(t) * d.c_out;
        for (std::size_t co = 0; co < d.c_out; ++co) yo[co] = b[co];
        for (std::size_t kh = 0; kh < d.kh; ++kh) {
            std::int64_t ih = std::int64_t(oh * d.stride + kh) - std::int64_t(d.pad);
            if (ih < 0 || ih >= std::int64_t(d.h_in)) continue;
            for (std::size_t kw = 0; kw < d.kw; ++kw) {
                std::int64_t iw = std::int64_t(ow * d.stride + kw) - std::int64_t(d.pad);
                if (iw < 0 || iw >= std::int64_t(d.w_in)) continue;
                const double* xi = x + ((bb * d.h_in + std::size_t(ih)) * d.w_in + std::size_t(iw)) * d.c_in;
                const double* kk = k + (kh * d.kw + kw) * d.c_in * d.c_out;
                for (std::size_t ci = 0; ci < d.c_in; ++ci) {
                    double xv = xi[ci];
                    const double* kr = kk + ci * d.c_out;
                    for (std::size_t co = 0; co < d.c_out; ++co) yo[co] += xv * kr[co];
                }
            }
        }
    }
}

void conv2d_bw_x(const double* g, const double* k, double* dx, const ConvDims& d) {
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < std::int64_t(d.batch * d.h_in * d.w_in); ++t) {
        std::size_t iw = std::size_t(t) % d.w_in;
        std::size_t ih = (std::size_t(t) / d.w_in) % d.h_in;
        std::size_t bb = std::size_t(t) / (d.w_in * d.h_in);
        double* dxi = dx + std::size_t(t) * d.c_in;
        for (std::size_t kh = 0; kh < d.kh; ++kh) {
            std::int64_t num_h = std::int64_t(ih + d.pad) - std::int64_t(kh);
            if (num_h < 0 || num_h % std::int64_t(d.stride) != 0) continue;
            std::int64_t oh = num_h / std::int64_t(d.stride);
            if (oh >= std::int64_t(d.h_out)) continue;
            for (std::size_t kw = 0; kw < d.kw; ++kw) {
                std::int64_t num_w = std::int64_t(iw + d.pad) - std::int64_t(kw);
                if (num_w < 0 || num_w % std::int64_t(d.stride) != 0) continue;
                std::int64_t ow = num_w / std::int64_t(d.stride);
                if (ow >= std::int64_t(d.w_out)) continue;
                const double* go = g + ((bb * d.h_out + std::size_t(oh)) * d.w_out + std::size_t(ow)) * d.c_out;
                const double* kk = k + (kh * d.kw + kw) * d.c_in * d.c_out;
                for (std::size_t ci = 0; ci < d.c_in; ++ci) {
                    double acc = 0.0;
                    const double* kr = kk + ci * d.c_out;
                    for (std::size_t co = 0; co < d.c_out; ++co) acc += go[co] * kr[co];
                    dxi[ci] += acc;
                }
            }
        }
    }
}

void conv2d_bw_kb(const double* g, const double* x, double* dk, double* db, const ConvDims& d) {
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < std::int64_t(d.kh * d.kw * d.c_in); ++t) {
        std::size_t ci = std::size_t(t) % d.c_in;
        std::size_t kw = (std::size_t(t) / d.c_in) % d.kw;
        std::size_t kh = std::size_t(t) / (d.c_in * d.kw);
        double* dkr = dk + ((kh * d.kw + kw) * d.c_in + ci) * d.c_out;
        for (std::size_t co = 0; co < d.c_out; ++co) {
            double acc = 0.0;
            for (std::size_t bb = 0; bb < d.batch; ++bb)
                for (std::size_t oh = 0; oh < d.h_out; ++oh) {
                    std::int64_t ih = std::int64_t(oh * d.stride + kh) - std::int64_t(d.pad);
                    if (ih < 0 || ih >= std::int64_t(d.h_in)) continue;
                    for (std::size_t ow = 0; ow < d.w_out; ++ow) {
                        std::int64_t iw = std::int64_t(ow * d.stride + kw) - std::int64_t(d.pad);
                        if (iw < 0 || iw >= std::int64_t(d.w_in)) continue;
                        acc += x[((bb * d.h_in + std::size_t(ih)) * d.w_in + std::size_t(iw)) * d.c_in + ci] *
                               g[((bb * d.h_out + oh) * d.w_out + ow) * d.c_out + co];
                    }
                }
            dkr[co] += acc;
        }
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t co = 0; co < std::int64_t(d.c_out); ++co) {
        double acc = 0.0;
        for (std::size_t i = 0; i < d.batch * d.h_out * d.w_out; ++i) acc += g[i * d.c_out + co];
        db[co] += acc;
    }
}

void conv_t2d_fw(const double* x, const double* k, const double* b, double* y, const ConvDims& d) {
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < std::int64_t(d.batch * d.h_out * d.w_out); ++t) {
        std::size_t ow = std::size_t(t) % d.w_out;
        std::size_t oh = (std::size_t(t) / d.w_out) % d.h_out;
        std::size_t bb = std::size_t(t) / (d.w_out * d.h_out);
        double* yo = y + std::size_t(t) * d.c_out;
        for (std::size_t co = 0; co < d.c_out; ++co) yo[co] = b[co];
        for (std::size_t kh = 0; kh < d.kh; ++kh) {
            std::int64_t num_h = std::int64_t(oh + d.pad) - std::int64_t(kh);
            if (num_h < 0 || num_h % std::int64_t(d.stride) != 0) continue;
            std::int64_t ih = num_h / std::int64_t(d.stride);
            if (ih >= std::int64_t(d.h_in)) continue;
            for (std::size_t kw = 0; kw < d.kw; ++kw) {
                std::int64_t num_w = std::int64_t(ow + d.pad) - std::int64_t(kw);
                if (num_w < 0 || num_w % std::int64_t(d.stride) != 0) continue;
                std::int64_t iw = num_w / std::int64_t(d.stride);
                if (iw >= std::int64_t(d.w_in)) continue;
                const double* xi = x + ((bb * d.h_in + std::size_t(ih)) * d.w_in + std::size_t(iw)) * d.c_in;
                const double* kk = k + (kh * d.kw + kw) * d.c_in * d.c_out;
                for (std::size_t ci = 0; ci < d.c_in; ++ci) {
                    double xv = xi[ci];
                    const double* kr = kk + ci * d.c_out;
                    for (std::size_t co = 0; co < d.c_out; ++co) yo[co] += xv * kr[co];
                }
            }
        }
    }
}

void conv_t2d_bw_x(const double* g, const double* k, double* dx, const ConvDims& d) {
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < std::int64_t(d.batch * d.h_in * d.w_in); ++t) {
        std::size_t iw = std::size_t(t) % d.w_in;
        std::size_t ih = (std::size_t(t) / d.w_in) % d.h_in;
        std::size_t bb = std::size_t(t) / (d.w_in * d.h_in);
        double* dxi = dx + std::size_t(t) * d.c_in;
        for (std::size_t kh = 0; kh < d.kh; ++kh) {
            std::int64_t oh = std::int64_t(ih * d.stride + kh) - std::int64_t(d.pad);
            if (oh < 0 || oh >= std::int64_t(d.h_out)) continue;
            for (std::size_t kw = 0; kw < d.kw; ++kw) {
                std::int64_t ow = std::int64_t(iw * d.stride + kw) - std::int64_t(d.pad);
                if (ow < 0 || ow >= std::int64_t(d.w_out)) continue;
                const double* go = g + ((bb * d.h_out + std::size_t(oh)) * d.w_out + std::size_t(ow)) * d.c_out;
                const double* kk = k + (kh * d.kw + kw) * d.c_in * d.c_out;
                for (std::size_t ci = 0; ci < d.c_in; ++ci) {
                    double acc = 0.0;
                    const double* kr = kk + ci * d.c_out;
                    for (std::size_t co = 0; co < d.c_out; ++co) acc += go[co] * kr[co];
                    dxi[ci] += acc;
                }
            }
        }
    }
}

void conv_t2d_bw_kb(const double* g, const double* x, double* dk, double* db, const ConvDims& d) {
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < std::int64_t(d.kh * d.kw * d.c_in); ++t) {
        std::size_t ci = std::size_t(t) % d.c_in;
        std::size_t kw = (std::size_t(t) / d.c_in) % d.kw;
        std::size_t kh = std::size_t(t) / (d.c_in * d.kw);
        double* dkr = dk + ((kh * d.kw + kw) * d.c_in + ci) * d.c_out;
        for (std::size_t co = 0; co < d.c_out; ++co) {
            double acc = 0.0;
            for (std::size_t bb = 0; bb < d.batch; ++bb)
                for (std::size_t ih = 0; ih < d.h_in; ++ih) {
                    std::int64_t oh = std::int64_t(ih * d.stride + kh) - std::int64_t(d.pad);
                    if (oh < 0 || oh >= std::int64_t(d.h_out)) continue;
                    for (std::size_t iw = 0; iw < d.w_in; ++iw) {
                        std::int64_t ow = std::int64_t(iw * d.stride + kw) - std::int64_t(d.pad);
                        if (ow < 0 || ow >= std::int64_t(d.w_out)) continue;
                        acc += x[((bb * d.h_in + ih) * d.w_in + iw) * d.c_in + ci] *
                               g[((bb * d.h_out + std::size_t(oh)) * d.w_out + std::size_t(ow)) * d.c_out + co];
                    }
                }
            dkr[co] += acc;
        }
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t co = 0; co < std::int64_t(d.c_out); ++co) {
        double acc = 0.0;
        for (std::size_t i = 0; i < d.batch * d.h_out * d.w_out; ++i) acc += g[i * d.c_out + co];
        db[co] += acc;
    }
}

double sum(const double* x, std::size_t n) {
    std::size_t nblk = (n + kSumBlock - 1) / kSumBlock;
    if (nblk == 0) return 0.0;
    std::vector<double> partial(nblk);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < std::int64_t(nblk); ++b) {
        std::size_t lo = std::size_t(b) * kSumBlock, hi = std::min(n, lo + kSumBlock);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += x[i];
        partial[b] = acc;
    }
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
    std::size_t nblk = (n + kSumBlock - 1) / kSumBlock;
    if (nblk == 0) return 0.0;
    std::vector<double> partial(nblk);
#pragma omp parallel for schedule(static)
    for (std::int64_t blk = 0; blk < std::int64_t(nblk); ++blk) {
        std::size_t lo = std::size_t(blk) * kSumBlock, hi = std::min(n, lo + kSumBlock);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            double d = a[i] - b[i];
            acc += d * d;
        }
        partial[blk] = acc;
    }
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

namespace serial {

void addn(const double* const* xs, std::size_t k, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double acc = xs[0][i];
        for (std::size_t j = 1; j < k; ++j) acc += xs[j][i];
        y[i] = acc;
    }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

void activation_fw(Act act, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        switch (act) {
            case Act::Identity: y[i] = x[i]; break;
            case Act::Relu: y[i] = x[i] > 0.0 ? x[i] : 0.0; break;
            case Act::Tanh: y[i] = std::tanh(x[i]); break;
        }
    }
}

void activation_bw(Act act, const double* y, const double* g, double* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        switch (act) {
            case Act::Identity: dx[i] += g[i]; break;
            case Act::Relu:
                if (y[i] > 0.0) dx[i] += g[i];
                break;
            case Act::Tanh: dx[i] += g[i] * (1.0 - y[i] * y[i]); break;
        }
    }
}

void pointwise_linear_fw(const double* x, const double* w, const double* b, double* y,
                         std::size_t p, std::size_t c_in, std::size_t c_out) {
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t co = 0; co < c_out; ++co) y[i * c_out + co] = b[co];
        for (std::size_t ci = 0; ci < c_in; ++ci)
            for (std::size_t co = 0; co < c_out; ++co)
                y[i * c_out + co] += x[i * c_in + ci] * w[ci * c_out + co];
    }
}

void pointwise_linear_bw_x(const double* g, const double* w, double* dx, std::size_t p,
                           std::size_t c_in, std::size_t c_out) {
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t ci = 0; ci < c_in; ++ci) {
            double acc = 0.0;
            for (std::size_t co = 0; co < c_out; ++co) acc += g[i * c_out + co] * w[ci * c_out + co];
            dx[i * c_in + ci] += acc;
        }
}

void pointwise_linear_bw_wb(const double* g, const double* x, double* dw, double* db,
                            std::size_t p, std::size_t c_in, std::size_t c_out) {
    for (std::size_t ci = 0; ci < c_in; ++ci)
        for (std::size_t co = 0; co < c_out; ++co) {
            double acc = 0.0;
            for (std::size_t i = 0; i < p; ++i) acc += x[i * c_in + ci] * g[i * c_out + co];
            dw[ci * c_out + co] += acc;
        }
    for (std::size_t co = 0; co < c_out; ++co) {
        double acc = 0.0;
        for (std::size_t i = 0; i < p; ++i) acc += g[i * c_out + co];
        db[co] += acc;
    }
}

void mode_mul_fw(const std::complex<double>* xh, const double* r, std::complex<double>* yh,
                 std::size_t batch, std::size_t nx, std::size_t kyr, std::size_t c_in,
                 std::size_t c_out, std::size_t m1, std::size_t m2) {
    for (std::size_t f = 0; f < batch * nx * kyr; ++f)
        for (std::size_t co = 0; co < c_out; ++co) yh[f * c_out + co] = {0.0, 0.0};
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t blk = 0; blk < 2; ++blk)
            for (std::size_t i = 0; i < m1; ++i) {
                std::size_t kx = blk == 0 ? i : nx - m1 + i;
                for (std::size_t j = 0; j < m2; ++j) {
                    std::size_t f = (b * nx + kx) * kyr + j;
                    for (std::size_t co = 0; co < c_out; ++co) {
                        double yr = 0.0, yi = 0.0;
                        for (std::size_t ci = 0; ci < c_in; ++ci) {
                            const std::complex<double>& xv = xh[f * c_in + ci];
                            std::size_t ri = (((blk * m1 + i) * m2 + j) * c_in + ci) * c_out * 2 + co * 2;
                            yr += xv.real() * r[ri] - xv.imag() * r[ri + 1];
                            yi += xv.real() * r[ri + 1] + xv.imag() * r[ri];
                        }
                        yh[f * c_out + co] = {yr, yi};
                    }
                }
            }
}

void mode_mul_bw_x(const std::complex<double>* g, const double* r, std::complex<double>* dxh,
                   std::size_t batch, std::size_t nx, std::size_t kyr, std::size_t c_in,
                   std::size_t c_out, std::size_t m1, std::size_t m2) {
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t blk = 0; blk < 2; ++blk)
            for (std::size_t i = 0; i < m1; ++i) {
                std::size_t kx = blk == 0 ? i : nx - m1 + i;
                for (std::size_t j = 0; j < m2; ++j) {
                    std::size_t f = (b * nx + kx) * kyr + j;
                    for (std::size_t ci = 0; ci < c_in; ++ci) {
                        double ar = 0.0, ai = 0.0;
                        for (std::size_t co = 0; co < c_out; ++co) {
                            const std::complex<double>& gv = g[f * c_out + co];
                            std::size_t ri = (((blk * m1 + i) * m2 + j) * c_in + ci) * c_out * 2 + co * 2;
                            ar += gv.real() * r[ri] + gv.imag() * r[ri + 1];
                            ai += gv.imag() * r[ri] - gv.real() * r[ri + 1];
                        }
                        dxh[f * c_in + ci] += std::complex<double>(ar, ai);
                    }
                }
            }
}

void mode_mul_bw_r(const std::complex<double>* g, const std::complex<double>* xh, double* dr,
                   std::size_t batch, std::size_t nx, std::size_t kyr, std::size_t c_in,
                   std::size_t c_out, std::size_t m1, std::size_t m2) {
    for (std::size_t blk = 0; blk < 2; ++blk)
        for (std::size_t i = 0; i < m1; ++i) {
            std::size_t kx = blk == 0 ? i : nx - m1 + i;
            for (std::size_t j = 0; j < m2; ++j)
                for (std::size_t ci = 0; ci < c_in; ++ci)
                    for (std::size_t co = 0; co < c_out; ++co) {
                        double ar = 0.0, ai = 0.0;
                        for (std::size_t b = 0; b < batch; ++b) {
                            std::size_t f = (b * nx + kx) * kyr + j;
                            const std::complex<double>& gv = g[f * c_out + co];
                            const std::complex<double>& xv = xh[f * c_in + ci];
                            ar += gv.real() * xv.real() + gv.imag() * xv.imag();
                            ai += gv.imag() * xv.real() - gv.real() * xv.imag();
                        }
                        std::size_t ri = (((blk * m1 + i) * m2 + j) * c_in + ci) * c_out * 2 + co * 2;
                        dr[ri] += ar;
                        dr[ri + 1] += ai;
                    }
        }
}

void conv2d_fw(const double* x, const double* k, const double* b, double* y, const ConvDims& d) {
    for (std::size_t bb = 0; bb < d.batch; ++bb)
        for (std::size_t oh = 0; oh < d.h_out; ++oh)
            for (std::size_t ow = 0; ow < d.w_out; ++ow) {
                double* yo = y + ((bb * d.h_out + oh) * d.w_out + ow) * d.c_out;
                for (std::size_t co = 0; co < d.c_out; ++co) yo[co] = b[co];
                for (std::size_t kh = 0; kh < d.kh; ++kh) {
                    std::int64_t ih = std::int64_t(oh * d.stride + kh) - std::int64_t(d.pad);
                    if (ih < 0 || ih >= std::int64_t(d.h_in)) continue;
                    for (std::size_t kw = 0; kw < d.kw; ++kw) {
                        std::int64_t iw = std::int64_t(ow * d.stride + kw) - std::int64_t(d.pad);
                        if (iw < 0 || iw >= std::int64_t(d.w_in)) continue;
                        for (std::size_t ci = 0; ci < d.c_in; ++ci)
                            for (std::size_t co = 0; co < d.c_out; ++co)
                                yo[co] += x[((bb * d.h_in + std::size_t(ih)) * d.w_in + std::size_t(iw)) * d.c_in + ci] *
                                          k[((kh * d.kw + kw) * d.c_in + ci) * d.c_out + co];
                    }
                }
            }
}

void conv2d_bw_x(const double* g, const double* k, double* dx, const ConvDims& d) {
    for (std::size_t bb = 0; bb < d.batch; ++bb)
        for (std::size_t ih = 0; ih < d.h_in; ++ih)
            for (std::size_t iw = 0; iw < d.w_in; ++iw)
                for (std::size_t kh = 0; kh < d.kh; ++kh) {
                    std::int64_t num_h = std::int64_t(ih + d.pad) - std::int64_t(kh);
                    if (num_h < 0 || num_h % std::int64_t(d.stride) != 0) continue;
                    std::int64_t oh = num_h / std::int64_t(d.stride);
                    if (oh >= std::int64_t(d.h_out)) continue;
                    for (std::size_t kw = 0; kw < d.kw; ++kw) {
                        std::int64_t num_w = std::int64_t(iw + d.pad) - std::int64_t(kw);
                        if (num_w < 0 || num_w % std::int64_t(d.stride) != 0) continue;
                        std::int64_t ow = num_w / std::int64_t(d.stride);
                        if (ow >= std::int64_t(d.w_out)) continue;
                        for (std::size_t ci = 0; ci < d.c_in; ++ci) {
                            double acc = 0.0;
                            for (std::size_t co = 0; co < d.c_out; ++co)
                                acc += g[((bb * d.h_out + std::size_t(oh)) * d.w_out + std::size_t(ow)) * d.c_out + co] *
                                       k[((kh * d.kw + kw) * d.c_in + ci) * d.c_out + co];
                            dx[((bb * d.h_in + ih) * d.w_in + iw) * d.c_in + ci] += acc;
                        }
                    }
                }
}

void conv2d_bw_kb(const double* g, const double* x, double* dk, double* db, const ConvDims& d) {
    for (std::size_t kh = 0; kh < d.kh; ++kh)
        for (std::size_t kw = 0; kw < d.kw; ++kw)
            for (std::size_t ci = 0; ci < d.c_in; ++ci)
                for (std::size_t co = 0; co < d.c_out; ++co) {
                    double acc = 0.0;
                    for (std::size_t bb = 0; bb < d.batch; ++bb)
                        for (std::size_t oh = 0; oh < d.h_out; ++oh) {
                            std::int64_t ih = std::int64_t(oh * d.stride + kh) - std::int64_t(d.pad);
                            if (ih < 0 || ih >= std::int64_t(d.h_in)) continue;
                            for (std::size_t ow = 0; ow < d.w_out; ++ow) {
                                std::int64_t iw = std::int64_t(ow * d.stride + kw) - std::int64_t(d.pad);
                                if (iw < 0 || iw >= std::int64_t(d.w_in)) continue;
                                acc += x[((bb * d.h_in + std::size_t(ih)) * d.w_in + std::size_t(iw)) * d.c_in + ci] *
                                       g[((bb * d.h_out + oh) * d.w_out + ow) * d.c_out + co];
                            }
                        }
                    dk[((kh * d.kw + kw) * d.c_in + ci) * d.c_out + co] += acc;
                }
    for (std::size_t co = 0; co < d.c_out; ++co) {
        double acc = 0.0;
        for (std::size_t i = 0; i < d.batch * d.h_out * d.w_out; ++i) acc += g[i * d.c_out + co];
        db[co] += acc;
    }
}

void conv_t2d_fw(const double* x, const double* k, const double* b, double* y, const ConvDims& d) {
    for (std::size_t bb = 0; bb < d.batch; ++bb)
        for (std::size_t oh = 0; oh < d.h_out; ++oh)
            for (std::size_t ow = 0; ow < d.w_out; ++ow) {
                double* yo = y + ((bb * d.h_out + oh) * d.w_out + ow) * d.c_out;
                for (std::size_t co = 0; co < d.c_out; ++co) yo[co] = b[co];
                for (std::size_t kh = 0; kh < d.kh; ++kh) {
                    std::int64_t num_h = std::int64_t(oh + d.pad) - std::int64_t(kh);
                    if (num_h < 0 || num_h % std::int64_t(d.stride) != 0) continue;
                    std::int64_t ih = num_h / std::int64_t(d.stride);
                    if (ih >= std::int64_t(d.h_in)) continue;
                    for (std::size_t kw = 0; kw < d.kw; ++kw) {
                        std::int64_t num_w = std::int64_t(ow + d.pad) - std::int64_t(kw);
                        if (num_w < 0 || num_w % std::int64_t(d.stride) != 0) continue;
                        std::int64_t iw = num_w / std::int64_t(d.stride);
                        if (iw >= std::int64_t(d.w_in)) continue;
                        for (std::size_t ci = 0; ci < d.c_in; ++ci)
                            for (std::size_t co = 0; co < d.c_out; ++co)
                                yo[co] += x[((bb * d.h_in + std::size_t(ih)) * d.w_in + std::size_t(iw)) * d.c_in + ci] *
                                          k[((kh * d.kw + kw) * d.c_in + ci) * d.c_out + co];
                    }
                }
            }
}

void conv_t2d_bw_x(const double* g, const double* k, double* dx, const ConvDims& d) {
    for (std::size_t bb = 0; bb < d.batch; ++bb)
        for (std::size_t ih = 0; ih < d.h_in; ++ih)
            for (std::size_t iw = 0; iw < d.w_in; ++iw)
                for (std::size_t kh = 0; kh < d.kh; ++kh) {
                    std::int64_t oh = std::int64_t(ih * d.stride + kh) - std::int64_t(d.pad);
                    if (oh < 0 || oh >= std::int64_t(d.h_out)) continue;
                    for (std::size_t kw = 0; kw < d.kw; ++kw) {
                        std::int64_t ow = std::int64_t(iw * d.stride + kw) - std::int64_t(d.pad);
                        if (ow < 0 || ow >= std::int64_t(d.w_out)) continue;
                        for (std::size_t ci = 0; ci < d.c_in; ++ci) {
                            double acc = 0.0;
                            for (std::size_t co = 0; co < d.c_out; ++co)
                                acc += g[((bb * d.h_out + std::size_t(oh)) * d.w_out + std::size_t(ow)) * d.c_out + co] *
                                       k[((kh * d.kw + kw) * d.c_in + ci) * d.c_out + co];
                            dx[((bb * d.h_in + ih) * d.w_in + iw) * d.c_in + ci] += acc;
                        }
                    }
                }
}

void conv_t2d_bw_kb(const double* g, const double* x, double* dk, double* db, const ConvDims& d) {
    for (std::size_t kh = 0; kh < d.kh; ++kh)
        for (std::size_t kw = 0; kw < d.kw; ++kw)
            for (std::size_t ci = 0; ci < d.c_in; ++ci)
                for (std::size_t co = 0; co < d.c_out; ++co) {
                    double acc = 0.0;
                    for (std::size_t bb = 0; bb < d.batch; ++bb)
                        for (std::size_t ih = 0; ih < d.h_in; ++ih) {
                            std::int64_t oh = std::int64_t(ih * d.stride + kh) - std::int64_t(d.pad);
                            if (oh < 0 || oh >= std::int64_t(d.h_out)) continue;
                            for (std::size_t iw = 0; iw < d.w_in; ++iw) {
                                std::int64_t ow = std::int64_t(iw * d.stride + kw) - std::int64_t(d.pad);
                                if (ow < 0 || ow >= std::int64_t(d.w_out)) continue;
                                acc += x[((bb * d.h_in + ih) * d.w_in + iw) * d.c_in + ci] *
                                       g[((bb * d.h_out + std::size_t(oh)) * d.w_out + std::size_t(ow)) * d.c_out + co];
                            }
                        }
                    dk[((kh * d.kw + kw) * d.c_in + ci) * d.c_out + co] += acc;
                }
    for (std::size_t co = 0; co < d.c_out; ++co) {
        double acc = 0.0;
        for (std::size_t i = 0; i < d.batch * d.h_out * d.w_out; ++i) acc += g[i * d.c_out + co];
        db[co] += acc;
    }
}

double sum(const double* x, std::size_t n) {
    std::size_t nblk = (n + 4095) / 4096;
    if (nblk == 0) return 0.0;
    std::vector<double> partial(nblk);
    for (std::size_t b = 0; b < nblk; ++b) {
        std::size_t lo = b * 4096, hi = std::min(n, lo + 4096);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += x[i];
        partial[b] = acc;
    }
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
    std::size_t nblk = (n + 4095) / 4096;
    if (nblk == 0) return 0.0;
    std::vector<double> partial(nblk);
    for (std::size_t blk = 0; blk < nblk; ++blk) {
        std::size_t lo = blk * 4096, hi = std::min(n, lo + 4096);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            double d = a[i] - b[i];
            acc += d * d;
        }
        partial[blk] = acc;
    }
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

} // namespace serial

} // namespace spectralseq::kernels
