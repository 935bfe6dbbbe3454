#pragma once
#include <cmath>
#include <stdexcept>

namespace dfield {

struct PhysicalConstants {
    double speed_of_sound = 343.0; // m/s
};

/// Frequency band [omega_min, omega_max] in rad/s with derived bandwidth and
/// band center. Angular frequencies throughout; from_hz() converts.
class BandSpec {
public:
    BandSpec(double omega_min, double omega_max)
        : omega_min_(omega_min), omega_max_(omega_max) {
        if (!(omega_min >= 0.0) || !(omega_max > omega_min))
            throw std::invalid_argument("BandSpec: need 0 <= omega_min < omega_max");
        if (!std::isfinite(omega_min) || !std::isfinite(omega_max))
            throw std::invalid_argument("BandSpec: non-finite band edge");
    }

    static BandSpec from_hz(double f_lo, double f_hi) {
        return BandSpec(2.0 * M_PI * f_lo, 2.0 * M_PI * f_hi);
    }

    double omega_min() const { return omega_min_; }
    double omega_max() const { return omega_max_; }
    double delta_omega() const { return omega_max_ - omega_min_; }
    double omega_center() const { return 0.5 * (omega_min_ + omega_max_); }

    double low_hz() const { return omega_min_ / (2.0 * M_PI); }
    double high_hz() const { return omega_max_ / (2.0 * M_PI); }

private:
    double omega_min_;
    double omega_max_;
};

} // namespace dfield
