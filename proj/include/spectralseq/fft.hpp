#pragma once

#include <cstddef>

#include "spectralseq/tensor.hpp"

namespace spectralseq {

/// Weight of a stored rfft2 column under Hermitian symmetry: the ky = 0
/// column (and ky = ny/2 when ny is even) appears once in the full
/// spectrum, every other stored column stands for itself plus its
/// conjugate mirror.
inline double hermitian_column_weight(std::size_t ky, std::size_t ny) {
    return (ky == 0 || 2 * ky == ny) ? 1.0 : 2.0;
}

/// Unnormalized forward real DFT over the two spatial axes.
/// (batch, nx, ny, channels) -> (batch, nx, ny/2 + 1, channels).
/// A rank-2 (nx, ny) input is treated as a single unbatched field.
Spectrum rfft2(const Tensor& f);

/// Inverse of rfft2, normalized by 1/(nx*ny).
/// The self-mirror columns (ky = 0 and ky = ny/2 for even ny) are
/// Hermitian-projected first, so the map is well defined for arbitrary
/// complex input and exactly inverts rfft2 on real data.
Tensor irfft2(const Spectrum& s, std::size_t ny);

/// Adjoint of rfft2 viewed as a real-linear map into (re, im) pairs:
/// given a spectrum cotangent, returns the field cotangent.
Tensor rfft2_adjoint(const Spectrum& gbar, std::size_t ny);

/// Adjoint of irfft2: given a field cotangent, returns the spectrum
/// cotangent, i.e. (w_ky / (nx*ny)) * rfft2(g) per column.
Spectrum irfft2_adjoint(const Tensor& gbar);

} // namespace spectralseq
