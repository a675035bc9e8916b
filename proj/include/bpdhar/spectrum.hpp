#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include <fftw3.h>

namespace bpdhar {

/// One-sided power spectrum of a real signal: power[k] for k = 0..n/2, scaled
/// so that the sum over all bins equals sum(x^2) (Parseval).
struct PowerSpectrum {
    std::vector<double> power;
    double bin_hz = 0.0;
};

namespace detail {

/// Cached FFTW plans keyed by length. Planning is serialized; execution of a
/// plan on fresh arrays (new-array execute) is thread-safe.
class FftPlanCache {
public:
    static FftPlanCache& instance() {
        static FftPlanCache cache;
        return cache;
    }

    fftw_plan plan_for(std::size_t n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        auto* in = static_cast<double*>(fftw_malloc(sizeof(double) * n));
        auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
        fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
        plans_.emplace(n, p);
        return p;
    }

    ~FftPlanCache() {
        for (auto& [n, p] : plans_) fftw_destroy_plan(p);
    }

private:
    FftPlanCache() = default;
    std::mutex mutex_;
    std::map<std::size_t, fftw_plan> plans_;
};

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

}  // namespace detail

/// Symmetric Hann window of length n.
inline std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (n < 2) return w;
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    return w;
}

/// Shared Hann window per length; entries are never evicted.
inline const std::vector<double>& cached_hann_window(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<const std::vector<double>>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<const std::vector<double>>(hann_window(n));
    return *slot;
}

inline PowerSpectrum power_spectrum(std::span<const double> x, double rate_hz) {
    const std::size_t n = x.size();
    PowerSpectrum out;
    if (n == 0) return out;
    out.bin_hz = rate_hz / static_cast<double>(n);
    std::unique_ptr<double, detail::FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    std::unique_ptr<fftw_complex, detail::FftwFree> spec(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
    std::copy(x.begin(), x.end(), in.get());
    fftw_execute_dft_r2c(detail::FftPlanCache::instance().plan_for(n), in.get(), spec.get());

    const std::size_t bins = n / 2 + 1;
    out.power.resize(bins);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < bins; ++k) {
        const double re = spec.get()[k][0];
        const double im = spec.get()[k][1];
        double p = (re * re + im * im) * scale;
        // Interior bins stand for both +k and -k.
        const bool nyquist = (n % 2 == 0) && k == n / 2;
        if (k != 0 && !nyquist) p *= 2.0;
        out.power[k] = p;
    }
    return out;
}

}  // namespace bpdhar
