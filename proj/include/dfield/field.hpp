#pragma once
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dfield/band.hpp"
#include "dfield/vec3.hpp"

namespace dfield {

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unnormalized sinc: sin(x)/x, with sinc(0) = 1.
double sinc(double x);

/// Spatial correlation of a narrowband diffuse field at angular frequency
/// omega for sensors a distance d apart: sinc(omega d / c).
double rho_narrowband(double distance, double omega, const PhysicalConstants& k = {});

/// Wideband closed form: sinc(dw d / 2c) * sinc(wc d / c).
double rho_wideband_closed(double distance, const BandSpec& band, const PhysicalConstants& k = {});

/// Exact diffuse band average (1/dw) * int_band sinc(w d / c) dw by adaptive
/// quadrature to absolute tolerance tol. This is the oracle every closed-form
/// and series route is validated against.
double rho_wideband_quadrature(double distance, const BandSpec& band,
                               const PhysicalConstants& k = {}, double tol = 1e-10);

/// Two-term Taylor approximation of the band average: the closed form plus
/// the cos/x^2 correction that the single-product form drops. Singular at
/// d = 0 (the correction has a 1/d^2 prefactor); use the closed form there.
double rho_second_order(double distance, const BandSpec& band, const PhysicalConstants& k = {});

/// The signed correction term alone: rho_second_order - rho_wideband_closed.
/// Its magnitude decays like 1/d^3 for large separations.
double second_order_term(double distance, const BandSpec& band, const PhysicalConstants& k = {});

/// Spherical Bessel function j_n(x), n >= 0, x >= 0. Downward (Miller)
/// recurrence for x < n, upward otherwise.
constexpr int kMaxBesselOrder = 128;
double spherical_bessel_j(int n, double x);

/// Complex orthonormal spherical harmonic Y_nm(dir) with Condon-Shortley
/// phase; int |Y_nm|^2 = 1 over the sphere and Y_{n,-m} = (-1)^m conj(Y_nm).
std::complex<double> spherical_harmonic(int n, int m, const Vec3& dir);

/// Product quadrature on the unit sphere: Gauss-Legendre in the polar angle
/// times a uniform azimuth grid. gauss_product(L) integrates products of
/// spherical harmonics exactly up to combined degree L.
struct SphereQuadrature {
    struct Node {
        Vec3 dir;
        double weight;
    };
    std::vector<Node> nodes;

    static SphereQuadrature gauss_product(int max_degree);

    double integrate(const std::function<double(const Vec3&)>& f) const;
    std::complex<double> integrate_complex(
        const std::function<std::complex<double>(const Vec3&)>& f) const;
};

/// Average directional power gain G(dir) >= 0. Anisotropy enters the
/// correlation model only through this; the per-band normalization
/// (G / delta_omega) is implicit. A gain marked normalized must satisfy
/// int G = 1 over the sphere.
class DirectionalGain {
public:
    DirectionalGain(std::function<double(const Vec3&)> g, bool normalized)
        : g_(std::move(g)), normalized_(normalized) {}

    /// G = 1/(4 pi): the diffuse field.
    static DirectionalGain isotropic();

    /// Smooth directional concentration around `center` (von Mises-Fisher
    /// density); normalized analytically. Large kappa approaches a single
    /// plane wave.
    static DirectionalGain von_mises_fisher(const Vec3& center, double kappa);

    double operator()(const Vec3& dir) const { return g_(dir); }
    bool normalized() const { return normalized_; }
    double integral(const SphereQuadrature& q) const;

private:
    std::function<double(const Vec3&)> g_;
    bool normalized_;
};

/// Spherical-harmonic coefficients beta_nm of a directional gain,
/// 0 <= n <= max_order, -n <= m <= n, stored in (n,m) -> n^2 + n + m order.
class ShCoefficients {
public:
    explicit ShCoefficients(int max_order)
        : max_order_(max_order),
          c_(static_cast<std::size_t>((max_order + 1) * (max_order + 1))) {
        if (max_order < 0) throw std::invalid_argument("ShCoefficients: negative order");
    }

    static ShCoefficients isotropic(int max_order = 0);

    int max_order() const { return max_order_; }
    std::size_t count() const { return c_.size(); }

    std::complex<double>& at(int n, int m) { return c_[index(n, m)]; }
    const std::complex<double>& at(int n, int m) const { return c_[index(n, m)]; }

private:
    std::size_t index(int n, int m) const {
        if (n < 0 || n > max_order_ || m < -n || m > n)
            throw std::out_of_range("ShCoefficients: (n,m) out of range");
        return static_cast<std::size_t>(n * n + n + m);
    }
    int max_order_;
    std::vector<std::complex<double>> c_;
};

/// beta_nm = int G(dir) conj(Y_nm(dir)) d dir by sphere quadrature.
/// Requires a normalized gain (int G = 1, checked against the quadrature).
ShCoefficients beta_coefficients(const DirectionalGain& gain, int max_order,
                                 const SphereQuadrature& quad);

/// Band-integrated spherical-harmonic series for the correlation of an
/// anisotropic field:
///   (4 pi / dw) int_band sum_n i^n j_n(w d / c) sum_m Y_nm(d_hat) beta_nm dw.
/// The series is truncated at beta.max_order(); a last-term magnitude test
/// rejects truncation orders too small for the requested tolerance.
std::complex<double> rho_anisotropic(const Vec3& separation, const BandSpec& band,
                                     const ShCoefficients& beta,
                                     const PhysicalConstants& k = {}, double tol = 1e-8);

/// Required truncation order for separation d at the band top: ceil(kd) + 10.
int anisotropic_order(double distance, const BandSpec& band, const PhysicalConstants& k = {});

/// Adaptive Simpson quadrature with absolute tolerance and bounded
/// refinement depth; throws QuadratureError if the budget is exhausted.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth = 20);
std::complex<double> integrate_adaptive_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double abs_tol, int max_depth = 20);

} // namespace dfield
