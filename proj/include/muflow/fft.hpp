#pragma once

// Complex DFT used by the spectral layer.
//
// Power-of-two sizes run through an iterative radix-2 transform with cached
// root/bit-reversal tables; other sizes fall back to a direct O(n^2) DFT so
// that every even grid size stays usable (the production runs all use powers
// of two). Convention: forward transform uses e^{-2 pi i jk/n}, no
// normalization here — callers divide by n where needed.

#include <complex>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <unordered_map>
#include <vector>

namespace muflow::detail {

using cplx = std::complex<double>;

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

struct FftTables {
    int n = 0;
    std::vector<cplx> roots;   // roots[j] = e^{-2 pi i j/n}
    std::vector<int> bitrev;   // radix-2 only
};

inline std::shared_ptr<const FftTables> fft_tables(int n) {
    static std::mutex mtx;
    static std::unordered_map<int, std::shared_ptr<const FftTables>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    if (auto it = cache.find(n); it != cache.end()) return it->second;

    auto t = std::make_shared<FftTables>();
    t->n = n;
    t->roots.resize(n);
    for (int j = 0; j < n; ++j) {
        double a = -2.0 * std::numbers::pi * static_cast<double>(j) / n;
        t->roots[j] = cplx(std::cos(a), std::sin(a));
    }
    if (is_pow2(n)) {
        int bits = 0;
        while ((1 << bits) < n) ++bits;
        t->bitrev.resize(n);
        for (int i = 0; i < n; ++i) {
            int r = 0;
            for (int b = 0; b < bits; ++b)
                if (i & (1 << b)) r |= 1 << (bits - 1 - b);
            t->bitrev[i] = r;
        }
    }
    cache.emplace(n, t);
    return cache[n];
}

/// In-place DFT. forward: X[k] = sum_j x[j] e^{-2 pi i jk/n};
/// inverse flips the exponent sign (still unnormalized).
inline void fft(std::vector<cplx>& x, bool inverse) {
    const int n = static_cast<int>(x.size());
    if (n <= 1) return;
    auto tables = fft_tables(n);
    const auto& roots = tables->roots;

    if (!is_pow2(n)) {
        std::vector<cplx> out(n);
        for (int k = 0; k < n; ++k) {
            cplx acc(0.0, 0.0);
            for (int j = 0; j < n; ++j) {
                cplx w = roots[static_cast<int>((static_cast<long long>(j) * k) % n)];
                if (inverse) w = std::conj(w);
                acc += x[j] * w;
            }
            out[k] = acc;
        }
        x = std::move(out);
        return;
    }

    const auto& rev = tables->bitrev;
    for (int i = 0; i < n; ++i)
        if (i < rev[i]) std::swap(x[i], x[rev[i]]);

    for (int len = 2; len <= n; len <<= 1) {
        const int stride = n / len;
        const int half = len / 2;
        for (int base = 0; base < n; base += len) {
            for (int j = 0; j < half; ++j) {
                cplx w = roots[static_cast<std::size_t>(j) * stride];
                if (inverse) w = std::conj(w);
                cplx even = x[base + j];
                cplx odd = x[base + j + half] * w;
                x[base + j] = even + odd;
                x[base + j + half] = even - odd;
            }
        }
    }
}

} // namespace muflow::detail
