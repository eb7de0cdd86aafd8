#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "spectralseq/errors.hpp"

namespace spectralseq {

namespace detail {
inline std::string dims_str(const std::vector<std::size_t>& d) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < d.size(); ++i) os << (i ? "," : "") << d[i];
    os << ")";
    return os.str();
}
} // namespace detail

/// Dense row-major tensor of doubles, arbitrary rank.
///
/// Deliberately dumb: flat storage plus index arithmetic. All numerical
/// work happens in free functions (see kernels.hpp) that operate on raw
/// pointers, so the production and serial reference paths share one type.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0)
        : dims_(std::move(dims)),
          data_(std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>()), fill) {
        if (dims_.empty()) throw ShapeError("tensor rank must be >= 1");
    }

    Tensor(std::initializer_list<std::size_t> dims, double fill = 0.0)
        : Tensor(std::vector<std::size_t>(dims), fill) {}

    static Tensor zeros(std::vector<std::size_t> dims) { return Tensor(std::move(dims), 0.0); }

    std::size_t rank() const { return dims_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const { return dims_.at(i); }
    const std::vector<std::size_t>& dims() const { return dims_; }

    bool same_shape(const Tensor& o) const { return dims_ == o.dims_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    template <typename... Ix>
    double& operator()(Ix... ix) {
        return data_[flat_index({static_cast<std::size_t>(ix)...})];
    }
    template <typename... Ix>
    double operator()(Ix... ix) const {
        return data_[flat_index({static_cast<std::size_t>(ix)...})];
    }

    std::size_t flat_index(std::initializer_list<std::size_t> ix) const {
        if (ix.size() != dims_.size())
            throw ShapeError("index rank " + std::to_string(ix.size()) + " vs tensor rank " +
                             std::to_string(dims_.size()));
        std::size_t flat = 0;
        std::size_t d = 0;
        for (std::size_t i : ix) {
            if (i >= dims_[d])
                throw ShapeError("index " + std::to_string(i) + " out of range for dim " +
                                 std::to_string(d) + " of " + detail::dims_str(dims_));
            flat = flat * dims_[d] + i;
            ++d;
        }
        return flat;
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    std::string shape_str() const { return detail::dims_str(dims_); }

private:
    std::vector<std::size_t> dims_;
    std::vector<double> data_;
};

/// Complex counterpart, used for Fourier-space data.
/// Layout matches fftw_complex, so FFTW can read/write the buffer directly.
class Spectrum {
public:
    Spectrum() = default;

    explicit Spectrum(std::vector<std::size_t> dims, std::complex<double> fill = {0.0, 0.0})
        : dims_(std::move(dims)),
          data_(std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>()), fill) {
        if (dims_.empty()) throw ShapeError("spectrum rank must be >= 1");
    }

    Spectrum(std::initializer_list<std::size_t> dims) : Spectrum(std::vector<std::size_t>(dims)) {}

    std::size_t rank() const { return dims_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const { return dims_.at(i); }
    const std::vector<std::size_t>& dims() const { return dims_; }

    bool same_shape(const Spectrum& o) const { return dims_ == o.dims_; }

    std::complex<double>* data() { return data_.data(); }
    const std::complex<double>* data() const { return data_.data(); }

    std::complex<double>& operator[](std::size_t flat) { return data_[flat]; }
    const std::complex<double>& operator[](std::size_t flat) const { return data_[flat]; }

    template <typename... Ix>
    std::complex<double>& operator()(Ix... ix) {
        return data_[flat_index({static_cast<std::size_t>(ix)...})];
    }
    template <typename... Ix>
    const std::complex<double>& operator()(Ix... ix) const {
        return data_[flat_index({static_cast<std::size_t>(ix)...})];
    }

    std::size_t flat_index(std::initializer_list<std::size_t> ix) const {
        if (ix.size() != dims_.size())
            throw ShapeError("index rank " + std::to_string(ix.size()) + " vs spectrum rank " +
                             std::to_string(dims_.size()));
        std::size_t flat = 0;
        std::size_t d = 0;
        for (std::size_t i : ix) {
            if (i >= dims_[d])
                throw ShapeError("index " + std::to_string(i) + " out of range for dim " +
                                 std::to_string(d) + " of " + detail::dims_str(dims_));
            flat = flat * dims_[d] + i;
            ++d;
        }
        return flat;
    }

    void fill(std::complex<double> v) { std::fill(data_.begin(), data_.end(), v); }

    std::string shape_str() const { return detail::dims_str(dims_); }

private:
    std::vector<std::size_t> dims_;
    std::vector<std::complex<double>> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": " + a.shape_str() + " vs " + b.shape_str());
}

} // namespace spectralseq
