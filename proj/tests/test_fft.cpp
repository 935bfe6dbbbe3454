#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "dfield/fft.hpp"
#include "dfield/rng.hpp"

using namespace dfield;
using cplx = std::complex<double>;

namespace {

// O(n^2) reference DFT
std::vector<cplx> dft(const std::vector<cplx>& x, bool inverse) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n, cplx(0, 0));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = (inverse ? 2.0 : -2.0) * M_PI * double(k) * double(j) / double(n);
            out[k] += x[j] * cplx(std::cos(ang), std::sin(ang));
        }
        if (inverse) out[k] /= double(n);
    }
    return out;
}

} // namespace

TEST_CASE("fft matches brute-force dft") {
    Rng rng(42);
    for (std::size_t n : {2u, 8u, 64u, 256u}) {
        std::vector<cplx> x(n);
        for (auto& v : x) v = cplx(rng.gaussian(), rng.gaussian());
        auto want = dft(x, false);
        auto got = x;
        fft::forward(got);
        for (std::size_t k = 0; k < n; ++k)
            CHECK(std::abs(got[k] - want[k]) < 1e-9 * std::sqrt(double(n)));
    }
}

TEST_CASE("fft roundtrip and parseval") {
    Rng rng(7);
    std::vector<cplx> x(4096);
    double time_energy = 0.0;
    for (auto& v : x) {
        v = cplx(rng.gaussian(), 0.0);
        time_energy += std::norm(v);
    }
    auto y = x;
    fft::forward(y);
    double freq_energy = 0.0;
    for (const auto& v : y) freq_energy += std::norm(v);
    CHECK(freq_energy / double(x.size()) == doctest::Approx(time_energy).epsilon(1e-12));

    fft::inverse(y);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y[i] - x[i]) < 1e-12);
}

TEST_CASE("fft rejects non-power-of-two sizes") {
    std::vector<cplx> x(3);
    CHECK_THROWS_AS(fft::forward(x), std::invalid_argument);
}

TEST_CASE("next_pow2") {
    CHECK(fft::next_pow2(1) == 1);
    CHECK(fft::next_pow2(2) == 2);
    CHECK(fft::next_pow2(3) == 4);
    CHECK(fft::next_pow2(480000) == 524288);
    CHECK(fft::is_pow2(524288));
    CHECK(!fft::is_pow2(480000));
}
