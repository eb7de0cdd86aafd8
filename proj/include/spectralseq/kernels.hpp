#pragma once

#include <complex>
#include <cstddef>

namespace spectralseq::kernels {

// Production kernels, OpenMP-parallel. Every output element is computed
// independently with a fixed inner summation order, so results are bitwise
// identical to the serial reference twins below regardless of thread count.
// Reductions (sum_squares etc.) use a fixed block decomposition folded in
// block order for the same reason.
//
// Gradient kernels ACCUMULATE into their destination buffers.

enum class Act { Identity = 0, Relu = 1, Tanh = 2 };

struct ConvDims {
    std::size_t batch, h_in, w_in, c_in, h_out, w_out, c_out, kh, kw, stride, pad, outpad;
};

void addn(const double* const* xs, std::size_t k, double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, const double* x, double* y, std::size_t n);

void activation_fw(Act act, const double* x, double* y, std::size_t n);
// dx += g * act'(y), with the derivative expressed through the output y
// (ReLU: y > 0; Tanh: 1 - y^2), so the forward value is the only saved state.
void activation_bw(Act act, const double* y, const double* g, double* dx, std::size_t n);

// x: (P, c_in) flattened over batch and grid, w: (c_in, c_out), b: (c_out)
void pointwise_linear_fw(const double* x, const double* w, const double* b, double* y,
                         std::size_t p, std::size_t c_in, std::size_t c_out);
void pointwise_linear_bw_x(const double* g, const double* w, double* dx, std::size_t p,
                           std::size_t c_in, std::size_t c_out);
void pointwise_linear_bw_wb(const double* g, const double* x, double* dw, double* db,
                            std::size_t p, std::size_t c_in, std::size_t c_out);

// xh: (batch, nx, kyr, c_in) complex, r: (2, m1, m2, c_in, c_out, 2) real,
// yh: (batch, nx, kyr, c_out) complex. Block 0 multiplies rows kx in [0, m1),
// block 1 rows kx in [nx - m1, nx), columns ky in [0, m2); everything else
// in yh is zeroed.
void mode_mul_fw(const std::complex<double>* xh, const double* r, std::complex<double>* yh,
                 std::size_t batch, std::size_t nx, std::size_t kyr, std::size_t c_in,
                 std::size_t c_out, std::size_t m1, std::size_t m2);
void mode_mul_bw_x(const std::complex<double>* g, const double* r, std::complex<double>* dxh,
                   std::size_t batch, std::size_t nx, std::size_t kyr, std::size_t c_in,
                   std::size_t c_out, std::size_t m1, std::size_t m2);
void mode_mul_bw_r(const std::complex<double>* g, const std::complex<double>* xh, double* dr,
                   std::size_t batch, std::size_t nx, std::size_t kyr, std::size_t c_in,
                   std::size_t c_out, std::size_t m1, std::size_t m2);

// x: (batch, h_in, w_in, c_in), k: (kh, kw, c_in, c_out), y: (batch, h_out, w_out, c_out)
void conv2d_fw(const double* x, const double* k, const double* b, double* y, const ConvDims& d);
void conv2d_bw_x(const double* g, const double* k, double* dx, const ConvDims& d);
void conv2d_bw_kb(const double* g, const double* x, double* dk, double* db, const ConvDims& d);

void conv_t2d_fw(const double* x, const double* k, const double* b, double* y, const ConvDims& d);
void conv_t2d_bw_x(const double* g, const double* k, double* dx, const ConvDims& d);
void conv_t2d_bw_kb(const double* g, const double* x, double* dk, double* db, const ConvDims& d);

double sum(const double* x, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);

namespace serial {

// Reference twins: plain loop nests, no pragmas. Tests assert bitwise
// equality against the parallel versions above.

void addn(const double* const* xs, std::size_t k, double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, const double* x, double* y, std::size_t n);
void activation_fw(Act act, const double* x, double* y, std::size_t n);
void activation_bw(Act act, const double* y, const double* g, double* dx, std::size_t n);
void pointwise_linear_fw(const double* x, const double* w, const double* b, double* y,
                         std::size_t p, std::size_t c_in, std::size_t c_out);
void pointwise_linear_bw_x(const double* g, const double* w, double* dx, std::size_t p,
                           std::size_t c_in, std::size_t c_out);
void pointwise_linear_bw_wb(const double* g, const double* x, double* dw, double* db,
                            std::size_t p, std::size_t c_in, std::size_t c_out);
void mode_mul_fw(const std::complex<double>* xh, const double* r, std::complex<double>* yh,
                 std::size_t batch, std::size_t nx, std::size_t kyr, std::size_t c_in,
                 std::size_t c_out, std::size_t m1, std::size_t m2);
void mode_mul_bw_x(const std::complex<double>* g, const double* r, std::complex<double>* dxh,
                   std::size_t batch, std::size_t nx, std::size_t kyr, std::size_t c_in,
                   std::size_t c_out, std::size_t m1, std::size_t m2);
void mode_mul_bw_r(const std::complex<double>* g, const std::complex<double>* xh, double* dr,
                   std::size_t batch, std::size_t nx, std::size_t kyr, std::size_t c_in,
                   std::size_t c_out, std::size_t m1, std::size_t m2);
void conv2d_fw(const double* x, const double* k, const double* b, double* y, const ConvDims& d);
void conv2d_bw_x(const double* g, const double* k, double* dx, const ConvDims& d);
void conv2d_bw_kb(const double* g, const double* x, double* dk, double* db, const ConvDims& d);
void conv_t2d_fw(const double* x, const double* k, const double* b, double* y, const ConvDims& d);
void conv_t2d_bw_x(const double* g, const double* k, double* dx, const ConvDims& d);
void conv_t2d_bw_kb(const double* g, const double* x, double* dk, double* db, const ConvDims& d);
double sum(const double* x, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);

} // namespace serial

} // namespace spectralseq::kernels
