#pragma once
#include <cmath>
#include <cstdint>
#include <utility>

#include "dfield/vec3.hpp"

namespace dfield {

/// Deterministic 64-bit generator (SplitMix64). All randomized operations in
/// the library draw from this so that a seed fully determines the output,
/// independent of platform or standard-library version.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal pair (Box-Muller).
    std::pair<double, double> gaussian_pair() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * M_PI * uniform();
        return {r * std::cos(t), r * std::sin(t)};
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        auto [a, b] = gaussian_pair();
        spare_ = b;
        have_spare_ = true;
        return a;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Derives an independent stream seed from a base seed and a stream index.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed ^ (0x632be59bd9b4e019ULL + stream * 0x9e3779b97f4a7c15ULL));
    return r.next_u64();
}

inline Vec3 sample_unit_vector(Rng& rng) {
    // uniform on the sphere: z uniform in [-1,1], azimuth uniform
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(phi), s * std::sin(phi), z};
}

inline Vec3 sample_in_ball(Rng& rng, double radius) {
    const Vec3 dir = sample_unit_vector(rng);
    const double r = radius * std::cbrt(rng.uniform());
    return dir * r;
}

/// Uniform over SO(3) via the quaternion subgroup method.
inline Mat3 sample_rotation(Rng& rng) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform(0.0, 2.0 * M_PI);
    const double u3 = rng.uniform(0.0, 2.0 * M_PI);
    const double x = std::sqrt(1.0 - u1) * std::sin(u2);
    const double y = std::sqrt(1.0 - u1) * std::cos(u2);
    const double z = std::sqrt(u1) * std::sin(u3);
    const double w = std::sqrt(u1) * std::cos(u3);

    Mat3 r;
    r.m[0][0] = 1 - 2*(y*y + z*z); r.m[0][1] = 2*(x*y - z*w);     r.m[0][2] = 2*(x*z + y*w);
    r.m[1][0] = 2*(x*y + z*w);     r.m[1][1] = 1 - 2*(x*x + z*z); r.m[1][2] = 2*(y*z - x*w);
    r.m[2][0] = 2*(x*z - y*w);     r.m[2][1] = 2*(y*z + x*w);     r.m[2][2] = 1 - 2*(x*x + y*y);
    return r;
}

} // namespace dfield
