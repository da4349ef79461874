#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace gccphat {

/// How hard FFTW searches for a fast plan. `estimate` picks a plan
/// heuristically and is reproducible from run to run; `measure` times
/// candidate plans, so the chosen algorithm (and its rounding) may vary.
enum class PlanRigor { estimate, measure };

/// Real-input FFT of fixed length backed by FFTW. Transforms use
/// caller-provided buffers and are safe to invoke concurrently on the same
/// object.
class RealFft {
public:
    explicit RealFft(std::size_t size, PlanRigor rigor = PlanRigor::estimate);
    ~RealFft();
    RealFft(RealFft&&) noexcept;
    RealFft& operator=(RealFft&&) noexcept;
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const { return size_; }
    std::size_t bins() const { return size_ / 2 + 1; }

    /// Unnormalized forward transform: out[k] = sum_t in[t] exp(-j 2 pi k t / size).
    void forward(std::span<const double> in, std::span<std::complex<double>> out) const;

    /// Unnormalized Hermitian inverse: out[t] = sum over the full implied spectrum.
    /// Imaginary parts of the DC and Nyquist bins are ignored. `in` is clobbered.
    void inverse(std::span<std::complex<double>> in, std::span<double> out) const;

private:
    struct Plans;
    std::size_t size_ = 0;
    std::unique_ptr<Plans> plans_;
};

/// Heap buffer aligned for SIMD transforms.
template <typename T>
class AlignedBuffer {
public:
    explicit AlignedBuffer(std::size_t count);
    ~AlignedBuffer();
    AlignedBuffer(const AlignedBuffer&) = delete;
    AlignedBuffer& operator=(const AlignedBuffer&) = delete;

    std::span<T> span() { return {data_, count_}; }
    T* data() { return data_; }
    std::size_t size() const { return count_; }

private:
    T* data_ = nullptr;
    std::size_t count_ = 0;
};

extern template class AlignedBuffer<double>;
extern template class AlignedBuffer<std::complex<double>>;

}  // namespace gccphat
