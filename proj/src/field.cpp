#include "dfield/field.hpp"

#include <algorithm>
#include <cmath>

namespace dfield {

double sinc(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-4) {
        // sin(x)/x = 1 - x^2/6 + x^4/120 - ...
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
    }
    return std::sin(x) / x;
}

double rho_narrowband(double distance, double omega, const PhysicalConstants& k) {
    if (distance < 0.0) throw std::invalid_argument("rho_narrowband: negative distance");
    return sinc(omega * distance / k.speed_of_sound);
}

double rho_wideband_closed(double distance, const BandSpec& band, const PhysicalConstants& k) {
    if (distance < 0.0) throw std::invalid_argument("rho_wideband_closed: negative distance");
    const double u = distance / k.speed_of_sound;
    return sinc(0.5 * band.delta_omega() * u) * sinc(band.omega_center() * u);
}

double rho_wideband_quadrature(double distance, const BandSpec& band,
                               const PhysicalConstants& k, double tol) {
    if (distance < 0.0) throw std::invalid_argument("rho_wideband_quadrature: negative distance");
    if (!(tol > 0.0)) throw std::invalid_argument("rho_wideband_quadrature: tol must be > 0");
    if (distance == 0.0) return 1.0; // integrand is identically 1
    const double u = distance / k.speed_of_sound;
    const double integral = integrate_adaptive(
        [u](double w) { return sinc(w * u); }, band.omega_min(), band.omega_max(), tol * band.delta_omega());
    return integral / band.delta_omega();
}

double second_order_term(double distance, const BandSpec& band, const PhysicalConstants& k) {
    if (!(distance > 0.0))
        throw std::invalid_argument("second_order_term: requires distance > 0 (1/d^2 prefactor)");
    const double u = distance / k.speed_of_sound;
    const double a = 0.5 * band.delta_omega() * u;
    const double b = band.omega_center() * u;
    const double s = std::sin(0.5 * a); // sin(dw d / 4c)
    return sinc(a) * (-2.0 * std::cos(b) / (b * b) * s * s);
}

double rho_second_order(double distance, const BandSpec& band, const PhysicalConstants& k) {
    return rho_wideband_closed(distance, band, k) + second_order_term(distance, band, k);
}

// ---------------------------------------------------------------------------
// spherical Bessel

double spherical_bessel_j(int n, double x) {
    if (n < 0 || n > kMaxBesselOrder)
        throw std::invalid_argument("spherical_bessel_j: order out of range");
    if (x < 0.0) throw std::invalid_argument("spherical_bessel_j: negative argument");

    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    if (n == 0) return sinc(x);
    const double j0 = sinc(x);
    const double j1 = sinc(x) / x - std::cos(x) / x;
    if (n == 1) return j1;

    if (x >= static_cast<double>(n)) {
        // upward recurrence, stable for x > n
        double jm = j0, jc = j1;
        for (int m = 1; m < n; ++m) {
            const double jn = (2.0 * m + 1.0) / x * jc - jm;
            jm = jc;
            jc = jn;
        }
        return jc;
    }

    // Miller's downward recurrence, normalized against j_0
    const int start = n + 16 + static_cast<int>(std::sqrt(40.0 * n));
    double jp = 0.0;      // j_{m+1}
    double jc = 1e-300;   // j_m
    double target = 0.0;
    for (int m = start; m >= 1; --m) {
        const double jm = (2.0 * m + 1.0) / x * jc - jp; // j_{m-1}
        jp = jc;
        jc = jm;
        if (m - 1 == n) target = jc; // unnormalized j_n
        if (std::abs(jc) > 1e250) {  // rescale to avoid overflow
            jc *= 1e-250;
            jp *= 1e-250;
            target *= 1e-250;
        }
    }
    // jc now corresponds to order 0
    return target * (j0 / jc);
}

// ---------------------------------------------------------------------------
// spherical harmonics

namespace {

// Normalized associated Legendre P~_n^m(cos t) with Condon-Shortley phase,
// such that Y_nm = P~_n^m(cos t) e^{i m phi}. Computed for one (n, m >= 0)
// by the standard diagonal-then-upward recurrence.
double normalized_legendre(int n, int m, double cos_t, double sin_t) {
    double pmm = 1.0 / std::sqrt(4.0 * M_PI); // P~_0^0
    for (int k = 1; k <= m; ++k)
        pmm *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * sin_t;
    if (n == m) return pmm;

    double pm1 = std::sqrt(2.0 * m + 3.0) * cos_t * pmm; // P~_{m+1}^m
    if (n == m + 1) return pm1;

    double pnn = 0.0;
    for (int l = m + 2; l <= n; ++l) {
        const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
        const double b = std::sqrt(((2.0 * l + 1.0) * ((l - 1.0) * (l - 1.0) - m * m)) /
                                   ((2.0 * l - 3.0) * (static_cast<double>(l) * l - m * m)));
        pnn = a * cos_t * pm1 - b * pmm;
        pmm = pm1;
        pm1 = pnn;
    }
    return pnn;
}

} // namespace

std::complex<double> spherical_harmonic(int n, int m, const Vec3& dir) {
    if (n < 0) throw std::invalid_argument("spherical_harmonic: negative order");
    if (std::abs(m) > n) throw std::invalid_argument("spherical_harmonic: |m| > n");
    if (!is_unit(dir, 1e-9)) throw std::invalid_argument("spherical_harmonic: dir not unit");

    const int ma = std::abs(m);
    const double cos_t = std::clamp(dir.z, -1.0, 1.0);
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double phi = std::atan2(dir.y, dir.x);

    const double p = normalized_legendre(n, ma, cos_t, sin_t);
    const std::complex<double> e(std::cos(ma * phi), std::sin(ma * phi));
    std::complex<double> y = p * e;
    if (m < 0) y = (ma % 2 == 0 ? 1.0 : -1.0) * std::conj(y);
    return y;
}

// ---------------------------------------------------------------------------
// sphere quadrature

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

} // namespace

SphereQuadrature SphereQuadrature::gauss_product(int max_degree) {
    if (max_degree < 0) throw std::invalid_argument("SphereQuadrature: negative degree");
    // n_polar Gauss points integrate cos-polynomials to degree 2 n_polar - 1;
    // n_azimuth uniform points integrate e^{i m phi} exactly for |m| < n_azimuth.
    const int n_polar = max_degree / 2 + 1;
    const int n_azimuth = max_degree + 1;

    std::vector<double> x, w;
    gauss_legendre(n_polar, x, w);

    SphereQuadrature q;
    q.nodes.reserve(static_cast<std::size_t>(n_polar) * n_azimuth);
    const double wphi = 2.0 * M_PI / n_azimuth;
    for (int i = 0; i < n_polar; ++i) {
        const double cos_t = x[i];
        const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
        for (int j = 0; j < n_azimuth; ++j) {
            const double phi = wphi * j;
            q.nodes.push_back({{sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t},
                               w[i] * wphi});
        }
    }
    return q;
}

double SphereQuadrature::integrate(const std::function<double(const Vec3&)>& f) const {
    double s = 0.0;
    for (const auto& n : nodes) s += n.weight * f(n.dir);
    return s;
}

std::complex<double> SphereQuadrature::integrate_complex(
    const std::function<std::complex<double>(const Vec3&)>& f) const {
    std::complex<double> s = 0.0;
    for (const auto& n : nodes) s += n.weight * f(n.dir);
    return s;
}

// ---------------------------------------------------------------------------
// directional gain and SH coefficients

DirectionalGain DirectionalGain::isotropic() {
    return DirectionalGain([](const Vec3&) { return 1.0 / (4.0 * M_PI); }, true);
}

DirectionalGain DirectionalGain::von_mises_fisher(const Vec3& center, double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("von_mises_fisher: kappa must be > 0");
    const Vec3 mu = normalize(center);
    // kappa / (2 pi (1 - e^{-2 kappa})) * e^{kappa (mu.y - 1)} integrates to 1
    const double norm_c = kappa / (2.0 * M_PI * (1.0 - std::exp(-2.0 * kappa)));
    return DirectionalGain(
        [mu, kappa, norm_c](const Vec3& d) { return norm_c * std::exp(kappa * (dot(mu, d) - 1.0)); },
        true);
}

double DirectionalGain::integral(const SphereQuadrature& q) const {
    return q.integrate(g_);
}

ShCoefficients ShCoefficients::isotropic(int max_order) {
    ShCoefficients b(max_order);
    b.at(0, 0) = 1.0 / std::sqrt(4.0 * M_PI);
    return b;
}

ShCoefficients beta_coefficients(const DirectionalGain& gain, int max_order,
                                 const SphereQuadrature& quad) {
    if (!gain.normalized())
        throw std::invalid_argument("beta_coefficients: gain must be normalized");
    const double total = gain.integral(quad);
    if (std::abs(total - 1.0) > 1e-6)
        throw std::invalid_argument("beta_coefficients: int G != 1 on the given quadrature");

    ShCoefficients beta(max_order);
    // one pass over nodes, accumulating G * conj(Y_nm) for all (n, m)
    for (const auto& node : quad.nodes) {
        const double gw = gain(node.dir) * node.weight;
        if (gw == 0.0) continue;
        for (int n = 0; n <= max_order; ++n)
            for (int m = -n; m <= n; ++m)
                beta.at(n, m) += gw * std::conj(spherical_harmonic(n, m, node.dir));
    }
    return beta;
}

// ---------------------------------------------------------------------------
// anisotropic series

int anisotropic_order(double distance, const BandSpec& band, const PhysicalConstants& k) {
    return static_cast<int>(std::ceil(band.omega_max() * distance / k.speed_of_sound)) + 10;
}

std::complex<double> rho_anisotropic(const Vec3& separation, const BandSpec& band,
                                     const ShCoefficients& beta, const PhysicalConstants& k,
                                     double tol) {
    const double d = norm(separation);
    if (d == 0.0) return {1.0, 0.0}; // only n = 0 survives and j_0(0) = 1
    if (!(tol > 0.0)) throw std::invalid_argument("rho_anisotropic: tol must be > 0");

    const int order = beta.max_order();
    const Vec3 dhat = separation / d;

    // frequency-independent angular factors S_n = sum_m Y_nm(dhat) beta_nm
    std::vector<std::complex<double>> s(order + 1, 0.0);
    for (int n = 0; n <= order; ++n)
        for (int m = -n; m <= n; ++m)
            s[n] += spherical_harmonic(n, m, dhat) * beta.at(n, m);

    // truncation check: the last retained order must be negligible at the
    // band top, where j_n is largest over the band
    const double x_max = band.omega_max() * d / k.speed_of_sound;
    if (order > kMaxBesselOrder)
        throw std::invalid_argument("rho_anisotropic: order exceeds Bessel limit");
    const double tail =
        4.0 * M_PI * std::abs(s[order]) * std::abs(spherical_bessel_j(order, x_max));
    if (tail > tol)
        throw std::invalid_argument("rho_anisotropic: truncation order too small for tolerance");

    const double u = d / k.speed_of_sound;
    const std::complex<double> i_unit(0.0, 1.0);
    std::vector<std::complex<double>> i_pow(order + 1);
    i_pow[0] = 1.0;
    for (int n = 1; n <= order; ++n) i_pow[n] = i_pow[n - 1] * i_unit;

    const auto integrand = [&](double w) {
        std::complex<double> acc = 0.0;
        const double x = w * u;
        for (int n = 0; n <= order; ++n) {
            if (s[n] == std::complex<double>(0.0, 0.0)) continue;
            acc += i_pow[n] * spherical_bessel_j(n, x) * s[n];
        }
        return acc;
    };

    const std::complex<double> integral = integrate_adaptive_complex(
        integrand, band.omega_min(), band.omega_max(), tol * band.delta_omega() / (4.0 * M_PI));
    return 4.0 * M_PI / band.delta_omega() * integral;
}

// ---------------------------------------------------------------------------
// adaptive Simpson

namespace {

template <typename T>
T adaptive_simpson_impl(const std::function<T(double)>& f, double a, double b, T fa, T fb,
                        T fm, T whole, double tol, int depth, int max_depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const T flm = f(lm);
    const T frm = f(rm);
    const T left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const T right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const T delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth >= max_depth)
        throw QuadratureError("adaptive quadrature failed to converge within depth budget");
    return adaptive_simpson_impl<T>(f, a, m, fa, fm, flm, left, 0.5 * tol, depth + 1, max_depth) +
           adaptive_simpson_impl<T>(f, m, b, fm, fb, frm, right, 0.5 * tol, depth + 1, max_depth);
}

template <typename T>
T adaptive_simpson(const std::function<T(double)>& f, double a, double b, double abs_tol,
                   int max_depth) {
    if (!(b > a)) throw std::invalid_argument("integrate_adaptive: need b > a");
    if (!(abs_tol > 0.0)) throw std::invalid_argument("integrate_adaptive: tol must be > 0");
    const T fa = f(a);
    const T fb = f(b);
    const T fm = f(0.5 * (a + b));
    const T whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_impl<T>(f, a, b, fa, fb, fm, whole, abs_tol, 0, max_depth);
}

} // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth) {
    return adaptive_simpson<double>(f, a, b, abs_tol, max_depth);
}

std::complex<double> integrate_adaptive_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b, double abs_tol,
    int max_depth) {
    return adaptive_simpson<std::complex<double>>(f, a, b, abs_tol, max_depth);
}

namespace {

// Oscillatory integrands need enough initial panels that the starting
// three-point Simpson estimate cannot alias whole cycles into a spuriously
// converged answer. `cycles` is the worst-case oscillation count over [a, b].
template <typename T>
T integrate_paneled(const std::function<T(double)>& f, double a, double b, double abs_tol,
                    double cycles, int max_depth = 20) {
    const int panels = std::max(4, static_cast<int>(std::ceil(4.0 * cycles)));
    const double per_panel = abs_tol / panels;
    T total{};
    for (int i = 0; i < panels; ++i) {
        const double x0 = a + (b - a) * i / panels;
        const double x1 = a + (b - a) * (i + 1) / panels;
        total += adaptive_simpson<T>(f, x0, x1, per_panel, max_depth);
    }
    return total;
}

} // namespace

} // namespace dfield
