#pragma once
#include <complex>
#include <cstddef>
#include <vector>

namespace dfield::fft {

constexpr bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// In-place iterative radix-2 transform. Size must be a power of two.
/// Forward uses e^{-i2pi kn/N}; inverse scales by 1/N.
void transform(std::vector<std::complex<double>>& a, bool inverse);

inline void forward(std::vector<std::complex<double>>& a) { transform(a, false); }
inline void inverse(std::vector<std::complex<double>>& a) { transform(a, true); }

} // namespace dfield::fft
