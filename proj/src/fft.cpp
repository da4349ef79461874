#include "gccphat/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <new>
#include <vector>

#include "gccphat/error.hpp"

namespace gccphat {

namespace {

// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

struct RealFft::Plans {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
    int alignment = 0;

    ~Plans() {
        std::lock_guard lock(planner_mutex());
        if (r2c) fftw_destroy_plan(r2c);
        if (c2r) fftw_destroy_plan(c2r);
    }
};

RealFft::RealFft(std::size_t size, PlanRigor rigor) : size_(size), plans_(std::make_unique<Plans>()) {
    if (size < 2) throw ConfigError("FFT size must be at least 2");
    AlignedBuffer<double> real(size);
    AlignedBuffer<std::complex<double>> spec(bins());
    const int n = static_cast<int>(size);
    const unsigned flags = rigor == PlanRigor::measure ? FFTW_MEASURE : FFTW_ESTIMATE;

    std::lock_guard lock(planner_mutex());
    plans_->r2c = fftw_plan_dft_r2c_1d(n, real.data(), as_fftw(spec.data()), flags);
    plans_->c2r = fftw_plan_dft_c2r_1d(n, as_fftw(spec.data()), real.data(), flags);
    plans_->alignment = fftw_alignment_of(real.data());
    if (!plans_->r2c || !plans_->c2r) throw NumericalError("FFTW failed to create a plan");
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
    if (in.size() != size_ || out.size() != bins()) {
        throw DimensionError("RealFft::forward: buffer sizes do not match transform size");
    }
    // FFTW's new-array interface needs the planning alignment; r2c keeps its input intact.
    auto* src = const_cast<double*>(in.data());
    if (fftw_alignment_of(src) == plans_->alignment &&
        fftw_alignment_of(reinterpret_cast<double*>(out.data())) == plans_->alignment) {
        fftw_execute_dft_r2c(plans_->r2c, src, as_fftw(out.data()));
        return;
    }
    AlignedBuffer<double> a(size_);
    AlignedBuffer<std::complex<double>> b(bins());
    std::copy(in.begin(), in.end(), a.data());
    fftw_execute_dft_r2c(plans_->r2c, a.data(), as_fftw(b.data()));
    std::copy(b.data(), b.data() + bins(), out.begin());
}

void RealFft::inverse(std::span<std::complex<double>> in, std::span<double> out) const {
    if (in.size() != bins() || out.size() != size_) {
        throw DimensionError("RealFft::inverse: buffer sizes do not match transform size");
    }
    if (fftw_alignment_of(reinterpret_cast<double*>(in.data())) == plans_->alignment &&
        fftw_alignment_of(out.data()) == plans_->alignment) {
        fftw_execute_dft_c2r(plans_->c2r, as_fftw(in.data()), out.data());
        return;
    }
    AlignedBuffer<std::complex<double>> a(bins());
    AlignedBuffer<double> b(size_);
    std::copy(in.begin(), in.end(), a.data());
    fftw_execute_dft_c2r(plans_->c2r, as_fftw(a.data()), b.data());
    std::copy(b.data(), b.data() + size_, out.begin());
}

template <typename T>
AlignedBuffer<T>::AlignedBuffer(std::size_t count) : count_(count) {
    data_ = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(count, 1)));
    if (!data_) throw std::bad_alloc();
    std::fill(data_, data_ + count, T{});
}

template <typename T>
AlignedBuffer<T>::~AlignedBuffer() {
    fftw_free(data_);
}

template class AlignedBuffer<double>;
template class AlignedBuffer<std::complex<double>>;

}  // namespace gccphat
