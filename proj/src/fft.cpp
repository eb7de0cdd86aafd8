#include "spectralseq/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <unordered_map>
#include <vector>

namespace spectralseq {
namespace {

// One cached plan per (nx, ny, howmany, direction). Plans are created with
// FFTW_ESTIMATE (deterministic, no array-dependent tuning) and
// FFTW_UNALIGNED so they can be re-executed on any buffer via the
// new-array interface, which is the thread-safe part of FFTW.
struct PlanKey {
    int nx, ny, howmany, r2c;
    bool operator==(const PlanKey& o) const {
        return nx == o.nx && ny == o.ny && howmany == o.howmany && r2c == o.r2c;
    }
};

struct PlanKeyHash {
    std::size_t operator()(const PlanKey& k) const {
        std::size_t h = std::size_t(k.nx);
        h = h * 1000003u + std::size_t(k.ny);
        h = h * 1000003u + std::size_t(k.howmany);
        h = h * 1000003u + std::size_t(k.r2c);
        return h;
    }
};

std::mutex g_plan_mutex;
std::unordered_map<PlanKey, fftw_plan, PlanKeyHash> g_plans;

fftw_plan get_plan(int nx, int ny, int howmany, bool r2c) {
    PlanKey key{nx, ny, howmany, r2c ? 1 : 0};
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto it = g_plans.find(key);
    if (it != g_plans.end()) return it->second;

    int n[2] = {nx, ny};
    int kyr = ny / 2 + 1;
    auto* rbuf = static_cast<double*>(fftw_malloc(sizeof(double) * std::size_t(nx) * ny * howmany));
    auto* cbuf = static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * std::size_t(nx) * kyr * howmany));
    fftw_plan p;
    if (r2c) {
        p = fftw_plan_many_dft_r2c(2, n, howmany, rbuf, nullptr, howmany, 1, cbuf, nullptr,
                                   howmany, 1, FFTW_ESTIMATE | FFTW_UNALIGNED);
    } else {
        p = fftw_plan_many_dft_c2r(2, n, howmany, cbuf, nullptr, howmany, 1, rbuf, nullptr,
                                   howmany, 1, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    fftw_free(rbuf);
    fftw_free(cbuf);
    if (!p) throw ConfigError("FFTW plan creation failed");
    g_plans.emplace(key, p);
    return p;
}

struct FftDims {
    std::size_t batch, nx, ny_or_kyr, channels;
    bool batched;
};

FftDims field_dims(const Tensor& f) {
    if (f.rank() == 2) return {1, f.dim(0), f.dim(1), 1, false};
    if (f.rank() == 4) return {f.dim(0), f.dim(1), f.dim(2), f.dim(3), true};
    throw ShapeError("rfft2 expects (batch, nx, ny, channels) or (nx, ny), got " + f.shape_str());
}

FftDims spectrum_dims(const Spectrum& s) {
    if (s.rank() == 2) return {1, s.dim(0), s.dim(1), 1, false};
    if (s.rank() == 4) return {s.dim(0), s.dim(1), s.dim(2), s.dim(3), true};
    throw ShapeError("irfft2 expects (batch, nx, kyr, channels) or (nx, kyr), got " +
                     s.shape_str());
}

// In place Hermitian projection of the self-mirror columns (ky = 0, and
// ky = ny/2 for even ny) of one (nx, kyr, C) slab. Interior columns have
// their mirror in the unstored half and need nothing.
void project_self_columns(std::complex<double>* s, std::size_t nx, std::size_t kyr,
                          std::size_t ny, std::size_t c_count) {
    std::vector<std::size_t> self_cols;
    self_cols.push_back(0);
    if (ny % 2 == 0 && ny / 2 < kyr && ny >= 2) self_cols.push_back(ny / 2);
    for (std::size_t ky : self_cols) {
        for (std::size_t kx = 0; kx <= nx / 2; ++kx) {
            std::size_t kxm = (nx - kx) % nx;
            for (std::size_t c = 0; c < c_count; ++c) {
                std::complex<double>& a = s[(kx * kyr + ky) * c_count + c];
                std::complex<double>& b = s[(kxm * kyr + ky) * c_count + c];
                std::complex<double> h = 0.5 * (a + std::conj(b));
                a = h;
                b = std::conj(h);
            }
        }
    }
}

} // namespace

Spectrum rfft2(const Tensor& f) {
    FftDims d = field_dims(f);
    if (d.nx < 2 || d.ny_or_kyr < 2) throw ShapeError("rfft2 needs nx, ny >= 2, got " + f.shape_str());
    std::size_t nx = d.nx, ny = d.ny_or_kyr, C = d.channels;
    std::size_t kyr = ny / 2 + 1;
    Spectrum out = d.batched ? Spectrum({d.batch, nx, kyr, C}) : Spectrum({nx, kyr});
    fftw_plan p = get_plan(int(nx), int(ny), int(C), true);
    std::size_t in_slab = nx * ny * C, out_slab = nx * kyr * C;
    for (std::size_t b = 0; b < d.batch; ++b) {
        // new-array execute does not touch the input for r2c
        fftw_execute_dft_r2c(p, const_cast<double*>(f.data()) + b * in_slab,
                             reinterpret_cast<fftw_complex*>(out.data() + b * out_slab));
    }
    return out;
}

Tensor irfft2(const Spectrum& s, std::size_t ny) {
    FftDims d = spectrum_dims(s);
    std::size_t nx = d.nx, kyr = d.ny_or_kyr, C = d.channels;
    if (kyr != ny / 2 + 1)
        throw ShapeError("irfft2: spectrum " + s.shape_str() + " inconsistent with ny=" +
                         std::to_string(ny));
    if (nx < 2 || ny < 2) throw ShapeError("irfft2 needs nx, ny >= 2");
    Tensor out = d.batched ? Tensor({d.batch, nx, ny, C}) : Tensor({nx, ny});
    fftw_plan p = get_plan(int(nx), int(ny), int(C), false);
    std::size_t in_slab = nx * kyr * C, out_slab = nx * ny * C;
    std::vector<std::complex<double>> scratch(in_slab);
    double norm = 1.0 / (double(nx) * double(ny));
    for (std::size_t b = 0; b < d.batch; ++b) {
        // c2r destroys its input, so work on a copy; projection makes the
        // transform well defined for non-Hermitian self columns.
        std::copy(s.data() + b * in_slab, s.data() + (b + 1) * in_slab, scratch.begin());
        project_self_columns(scratch.data(), nx, kyr, ny, C);
        fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(scratch.data()),
                             out.data() + b * out_slab);
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= norm;
    return out;
}

Tensor rfft2_adjoint(const Spectrum& gbar, std::size_t ny) {
    FftDims d = spectrum_dims(gbar);
    std::size_t nx = d.nx, kyr = d.ny_or_kyr, C = d.channels;
    if (kyr != ny / 2 + 1)
        throw ShapeError("rfft2_adjoint: spectrum " + gbar.shape_str() +
                         " inconsistent with ny=" + std::to_string(ny));
    Tensor out = d.batched ? Tensor({d.batch, nx, ny, C}) : Tensor({nx, ny});
    fftw_plan p = get_plan(int(nx), int(ny), int(C), false);
    std::size_t in_slab = nx * kyr * C, out_slab = nx * ny * C;
    std::vector<std::complex<double>> scratch(in_slab);
    for (std::size_t b = 0; b < d.batch; ++b) {
        std::copy(gbar.data() + b * in_slab, gbar.data() + (b + 1) * in_slab, scratch.begin());
        // Interior columns are double-counted by c2r (stored entry plus its
        // conjugate mirror), so halve them; self columns Hermitian-project,
        // which is exactly the adjoint of reading Re/Im as independent dofs.
        for (std::size_t kx = 0; kx < nx; ++kx)
            for (std::size_t ky = 0; ky < kyr; ++ky) {
                if (hermitian_column_weight(ky, ny) == 1.0) continue;
                for (std::size_t c = 0; c < C; ++c) scratch[(kx * kyr + ky) * C + c] *= 0.5;
            }
        project_self_columns(scratch.data(), nx, kyr, ny, C);
        fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(scratch.data()),
                             out.data() + b * out_slab);
    }
    return out;
}

Spectrum irfft2_adjoint(const Tensor& gbar) {
    Spectrum out = rfft2(gbar);
    FftDims d = field_dims(gbar);
    std::size_t nx = d.nx, ny = d.ny_or_kyr, C = d.channels;
    std::size_t kyr = ny / 2 + 1;
    double norm = 1.0 / (double(nx) * double(ny));
    for (std::size_t b = 0; b < d.batch; ++b)
        for (std::size_t kx = 0; kx < nx; ++kx)
            for (std::size_t ky = 0; ky < kyr; ++ky) {
                double w = hermitian_column_weight(ky, ny) * norm;
                std::size_t base = ((b * nx + kx) * kyr + ky) * C;
                for (std::size_t c = 0; c < C; ++c) out[base + c] *= w;
            }
    return out;
}

} // namespace spectralseq
