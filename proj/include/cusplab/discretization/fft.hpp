#pragma once

#include <fftw3.h>

#include <array>
#include <complex>
#include <memory>
#include <mutex>

#include "cusplab/core.hpp"

namespace cusplab::discretization {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex mu;
    return mu;
}

/// fftw_malloc'd buffer; FFTW's new-array execute needs matching alignment.
template <class T>
class FftwBuffer {
public:
    explicit FftwBuffer(std::size_t n) : n_(n), p_(static_cast<T*>(fftw_malloc(sizeof(T) * (n ? n : 1)))) {
        if (!p_) throw ResourceError("fftw_malloc failed");
    }
    ~FftwBuffer() { fftw_free(p_); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    FftwBuffer(FftwBuffer&& o) noexcept : n_(o.n_), p_(o.p_) { o.p_ = nullptr; o.n_ = 0; }

    T* data() { return p_; }
    const T* data() const { return p_; }
    [[nodiscard]] std::size_t size() const { return n_; }
    T& operator[](std::size_t i) { return p_[i]; }
    const T& operator[](std::size_t i) const { return p_[i]; }

private:
    std::size_t n_;
    T* p_;
};

/// Real-to-complex 3D transform pair of fixed shape. Plans use FFTW_ESTIMATE
/// so results do not depend on timing measurements.
class FftPlan3 {
public:
    explicit FftPlan3(std::array<std::size_t, 3> shape) : shape_(shape) {
        FftwBuffer<double> r(real_size());
        FftwBuffer<fftw_complex> c(complex_size());
        std::lock_guard lock(fftw_planner_mutex());
        const int n0 = static_cast<int>(shape[0]), n1 = static_cast<int>(shape[1]), n2 = static_cast<int>(shape[2]);
        forward_ = fftw_plan_dft_r2c_3d(n0, n1, n2, r.data(), c.data(), FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r_3d(n0, n1, n2, c.data(), r.data(), FFTW_ESTIMATE);
        if (!forward_ || !backward_) throw ResourceError("FFTW planning failed");
    }
    ~FftPlan3() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }
    FftPlan3(const FftPlan3&) = delete;
    FftPlan3& operator=(const FftPlan3&) = delete;

    [[nodiscard]] const std::array<std::size_t, 3>& shape() const { return shape_; }
    [[nodiscard]] std::size_t real_size() const { return shape_[0] * shape_[1] * shape_[2]; }
    [[nodiscard]] std::size_t complex_size() const { return shape_[0] * shape_[1] * (shape_[2] / 2 + 1); }

    void forward(FftwBuffer<double>& in, FftwBuffer<fftw_complex>& out) const { fftw_execute_dft_r2c(forward_, in.data(), out.data()); }
    /// Unnormalized inverse (FFTW convention); destroys the input.
    void backward(FftwBuffer<fftw_complex>& in, FftwBuffer<double>& out) const { fftw_execute_dft_c2r(backward_, in.data(), out.data()); }

private:
    std::array<std::size_t, 3> shape_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

/// Smallest m >= n with no prime factor above 7.
inline std::size_t fft_friendly(std::size_t n) {
    for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
        std::size_t r = m;
        for (std::size_t p : {2, 3, 5, 7})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

}  // namespace cusplab::discretization
