#pragma once

// Thin FFTW wrapper. Buffers come from fftw_malloc so every transform of a given
// shape runs the same codelets, which keeps results bit-identical between runs.

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <new>
#include <tuple>
#include <vector>

#include <fftw3.h>

namespace opticsbench {

template <typename T>
struct FftwAllocator {
    using value_type = T;

    FftwAllocator() noexcept = default;
    template <typename U>
    FftwAllocator(const FftwAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        void* p = fftw_malloc(n * sizeof(T));
        if (p == nullptr) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }

    template <typename U>
    bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using Complex = std::complex<double>;
using ComplexBuffer = std::vector<Complex, FftwAllocator<Complex>>;
using RealBuffer = std::vector<double, FftwAllocator<double>>;

namespace detail {

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    static constexpr int kDct1 = 0;

    // FFTW planning is not thread-safe; execution of an existing plan on new arrays is.
    fftw_plan get(int rows, int cols, int sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(rows, cols, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        fftw_plan plan = nullptr;
        if (sign == kDct1) {
            RealBuffer scratch(static_cast<std::size_t>(rows) * cols);
            plan = fftw_plan_r2r_2d(rows, cols, scratch.data(), scratch.data(), FFTW_REDFT00, FFTW_REDFT00,
                                    FFTW_ESTIMATE);
        } else {
            ComplexBuffer scratch(static_cast<std::size_t>(rows) * cols);
            auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
            plan = fftw_plan_dft_2d(rows, cols, p, p, sign, FFTW_ESTIMATE);
        }
        plans_.emplace(key, plan);
        return plan;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace detail

// In-place unnormalized 2-D DFT of a row-major rows x cols array.
inline void fft2d(ComplexBuffer& data, int rows, int cols, bool inverse = false) {
    fftw_plan plan = detail::PlanCache::instance().get(rows, cols, inverse ? FFTW_BACKWARD : FFTW_FORWARD);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

// In-place 2-D DCT-I (FFTW REDFT00). Entry (ky, kx) equals the DFT of the
// whole-sample even extension of size 2(rows-1) x 2(cols-1) at that frequency.
inline void dct1_2d(RealBuffer& data, int rows, int cols) {
    fftw_plan plan = detail::PlanCache::instance().get(rows, cols, detail::PlanCache::kDct1);
    fftw_execute_r2r(plan, data.data(), data.data());
}

// Swap quadrants so index 0 moves to (rows/2, cols/2).
template <typename T, typename Alloc>
void fftshift(std::vector<T, Alloc>& data, int rows, int cols) {
    std::vector<T, Alloc> out(data.size());
    for (int r = 0; r < rows; ++r) {
        const int rr = (r + rows / 2) % rows;
        for (int c = 0; c < cols; ++c) {
            const int cc = (c + cols / 2) % cols;
            out[static_cast<std::size_t>(rr) * cols + cc] = data[static_cast<std::size_t>(r) * cols + c];
        }
    }
    data.swap(out);
}

}  // namespace opticsbench
