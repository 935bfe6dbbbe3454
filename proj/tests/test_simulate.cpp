#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>

#include "dfield/calibrate.hpp"
#include "dfield/estimate.hpp"
#include "dfield/fft.hpp"
#include "dfield/field.hpp"
#include "dfield/simulate.hpp"

using namespace dfield;

namespace {

const BandSpec kBand = BandSpec::from_hz(500.0, 4500.0);

double channel_power(const std::vector<double>& x) {
    double p = 0.0;
    for (double v : x) p += v * v;
    return p / double(x.size());
}

Recording wrap(std::vector<std::vector<double>> chans, double fs) {
    Recording r;
    r.sample_rate = fs;
    r.channels = std::move(chans);
    return r;
}

// mean PSD (dB) of channel 0 over [f_lo, f_hi]
double mean_band_db(const Recording& rec, double f_lo, double f_hi) {
    const auto spec = estimate_magnitude_response(
        rec, BandSpec::from_hz(std::max(f_lo, 1.0), std::min(f_hi, rec.sample_rate / 2 - 1)));
    double acc = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < spec.freq_hz.size(); ++i) {
        if (spec.freq_hz[i] >= f_lo && spec.freq_hz[i] <= f_hi) {
            acc += spec.magnitude_db[0][i];
            ++n;
        }
    }
    REQUIRE(n > 0);
    return acc / n;
}

} // namespace

TEST_CASE("speaker drives: determinism, independence, power") {
    const auto a = synth_speaker_drives(2, kBand, 4.0, 16000.0, 99);
    const auto b = synth_speaker_drives(2, kBand, 4.0, 16000.0, 99);
    REQUIRE(a.size() == 2);
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
    CHECK(a[0] != a[1]);
    const auto c = synth_speaker_drives(1, kBand, 4.0, 16000.0, 100);
    CHECK(c[0] != a[0]);

    CHECK(channel_power(a[0]) == doctest::Approx(1.0).epsilon(0.02));

    // 30 s cross-correlation between independent drives
    const auto d = synth_speaker_drives(2, kBand, 30.0, 16000.0, 7);
    const Recording rec = wrap({d[0], d[1]}, 16000.0);
    CHECK(std::abs(estimate_correlation(rec, 0, 1)) < 0.02);
}

TEST_CASE("speaker drives: band shape") {
    SUBCASE("white: flat in band, silent one octave below") {
        auto d = synth_speaker_drives(1, kBand, 30.0, 16000.0, 3);
        const Recording rec = wrap({std::move(d[0])}, 16000.0);
        // ten subband means within +-1 dB of the band mean
        std::vector<double> sub;
        for (int i = 0; i < 10; ++i) {
            const double lo = 500.0 + 400.0 * i;
            sub.push_back(mean_band_db(rec, lo, lo + 400.0));
        }
        const double mean = std::accumulate(sub.begin(), sub.end(), 0.0) / sub.size();
        for (double v : sub) CHECK(std::abs(v - mean) < 1.0);
        // an octave below the band edge: >= 60 dB down
        CHECK(mean - mean_band_db(rec, 125.0, 250.0) >= 60.0);
    }
    SUBCASE("rejection an octave above the top edge") {
        auto d = synth_speaker_drives(1, kBand, 20.0, 32000.0, 3);
        const Recording rec = wrap({std::move(d[0])}, 32000.0);
        const double inband = mean_band_db(rec, 500.0, 4500.0);
        CHECK(inband - mean_band_db(rec, 9000.0, 14000.0) >= 60.0);
    }
    SUBCASE("pink: -3 dB per octave") {
        auto d = synth_speaker_drives(1, kBand, 30.0, 16000.0, 3, NoiseColor::pink);
        const Recording rec = wrap({std::move(d[0])}, 16000.0);
        const double lo = mean_band_db(rec, 950.0, 1050.0);
        const double hi = mean_band_db(rec, 1900.0, 2100.0);
        CHECK(lo - hi == doctest::Approx(3.0103).epsilon(0.15));
    }
    SUBCASE("aliasing guard") {
        CHECK_THROWS_AS(synth_speaker_drives(1, kBand, 1.0, 8000.0, 1), std::invalid_argument);
    }
}

TEST_CASE("render: degenerate geometries give unit correlation") {
    const auto layout = make_polyhedral_layout(LayoutKind::rhombic_triacontahedron, 1.8, 26);
    CaptureConfig cfg;
    cfg.band = kBand;
    cfg.duration_s = 4.0;
    cfg.speaker_count = 1;
    cfg.seed = 5;

    SUBCASE("nearly coincident mics") {
        const auto geom = make_geometry({{0, 0, 0}, {0, 1e-9, 0}});
        const Recording rec = render_capture(layout, geom, cfg);
        CHECK(estimate_correlation(rec, 0, 1) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("broadside pair: zero relative delay") {
        // speaker on +x, mics separated along y
        const auto lay = make_explicit_layout({{1.8, 0, 0}});
        const auto geom = make_geometry({{0, -0.1, 0}, {0, 0.1, 0}});
        const Recording rec = render_capture(lay, geom, cfg);
        CHECK(estimate_correlation(rec, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("render: fixed equals the one-segment identity trajectory bit for bit") {
    const auto layout = make_polyhedral_layout(LayoutKind::rhombic_triacontahedron, 1.8, 26);
    const auto geom = default_linear_array();
    CaptureConfig cfg;
    cfg.band = kBand;
    cfg.duration_s = 2.0;
    cfg.speaker_count = 3;
    cfg.seed = 11;

    const Recording fixed = render_capture(layout, geom, cfg);
    cfg.trajectory = Trajectory::fixed(cfg.duration_s);
    const Recording traj = render_capture(layout, geom, cfg);
    REQUIRE(fixed.channel_count() == traj.channel_count());
    for (std::size_t c = 0; c < fixed.channel_count(); ++c)
        CHECK(fixed.channels[c] == traj.channels[c]);
}

TEST_CASE("render: multi-segment identity trajectory stays close to fixed") {
    const auto layout = make_polyhedral_layout(LayoutKind::rhombic_triacontahedron, 1.8, 26);
    const auto geom = default_linear_array();
    CaptureConfig cfg;
    cfg.band = kBand;
    cfg.duration_s = 4.0;
    cfg.speaker_count = 2;
    cfg.seed = 21;

    const Recording fixed = render_capture(layout, geom, cfg);
    Trajectory t;
    for (int i = 0; i < 8; ++i) t.segments.push_back({0.5, Pose::identity()});
    cfg.trajectory = t;
    const Recording seg = render_capture(layout, geom, cfg);

    const auto cf = correlation_curve(fixed, geom);
    const auto cs = correlation_curve(seg, geom);
    for (std::size_t i = 0; i < cf.entries.size(); ++i)
        CHECK(std::abs(cf.entries[i].rho - cs.entries[i].rho) < 2e-3);
}

TEST_CASE("render: far-field phase of a single plane wave") {
    // cross-spectrum phase between two mics must be omega (dx . y_hat) / c
    const Vec3 dx{0.1, 0, 0};
    const auto geom = make_geometry({{0, 0, 0}, dx});
    CaptureConfig cfg;
    cfg.band = kBand;
    cfg.duration_s = 2.0;
    cfg.speaker_count = 1;
    cfg.seed = 31;
    // tilt the propagation so the delay is nonzero
    const auto lay2 = make_explicit_layout({normalize(Vec3{-1, 0, 2}) * 1.8});
    const Recording rec = render_capture(lay2, geom, cfg);

    const std::size_t n = rec.frames();
    const std::size_t p = fft::next_pow2(n);
    std::vector<std::complex<double>> a(p, {0, 0}), b(p, {0, 0});
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = {rec.channels[0][i], 0.0};
        b[i] = {rec.channels[1][i], 0.0};
    }
    fft::forward(a);
    fft::forward(b);

    const Vec3 yhat = lay2.propagation_direction(0);
    const double c = PhysicalConstants{}.speed_of_sound;
    int checked = 0;
    for (std::size_t k = 0; k < p / 2; ++k) {
        const double f = k * cfg.sample_rate / double(p);
        if (f < 700.0 || f > 4300.0) continue;
        if ((k % 256) != 0) continue;
        const std::complex<double> cross = b[k] * std::conj(a[k]);
        if (std::abs(cross) < 1e-6) continue;
        const double want = -2.0 * M_PI * f * dot(dx, yhat) / c; // channel 1 lags by dx.y/c
        const double got = std::arg(cross);
        double diff = got - want;
        while (diff > M_PI) diff -= 2.0 * M_PI;
        while (diff < -M_PI) diff += 2.0 * M_PI;
        CHECK(std::abs(diff) < 0.01 * std::abs(want) + 1e-9);
        ++checked;
    }
    CHECK(checked > 20);
}

TEST_CASE("render: output power scales with speaker count") {
    const auto layout = make_polyhedral_layout(LayoutKind::rhombic_triacontahedron, 1.8, 26);
    const auto geom = make_geometry({{0, 0, 0}, {0.05, 0, 0}});
    double p1 = 0.0;
    for (int count : {1, 2, 4, 8}) {
        CaptureConfig cfg;
        cfg.band = kBand;
        cfg.duration_s = 8.0;
        cfg.speaker_count = count;
        cfg.seed = 77;
        const Recording rec = render_capture(layout, geom, cfg);
        const double p = channel_power(rec.channels[0]);
        if (count == 1)
            p1 = p;
        else
            CHECK(p == doctest::Approx(p1 * count).epsilon(0.05));
    }
}

TEST_CASE("render: guards and validation") {
    const auto layout = make_polyhedral_layout(LayoutKind::rhombic_triacontahedron, 1.8, 26);
    const auto geom = default_linear_array();
    CaptureConfig cfg;
    cfg.band = kBand;
    cfg.duration_s = 1.0;
    cfg.speaker_count = 2;

    SUBCASE("escaping trajectory") {
        Trajectory t = Trajectory::fixed(1.0, Pose{{1.7, 0, 0}, Mat3::identity()});
        cfg.trajectory = t;
        CHECK_THROWS_AS(render_capture(layout, geom, cfg), std::invalid_argument);
    }
    SUBCASE("short trajectory") {
        cfg.trajectory = Trajectory::fixed(0.4);
        CHECK_THROWS_AS(render_capture(layout, geom, cfg), std::invalid_argument);
    }
    SUBCASE("speaker count out of range") {
        cfg.speaker_count = 27;
        CHECK_THROWS_AS(render_capture(layout, geom, cfg), std::invalid_argument);
        cfg.speaker_count = 0;
        CHECK_THROWS_AS(render_capture(layout, geom, cfg), std::invalid_argument);
    }
    SUBCASE("gain count mismatch") {
        cfg.channel_gains.assign(3, GainCurve{});
        CHECK_THROWS_AS(render_capture(layout, geom, cfg), std::invalid_argument);
    }
    SUBCASE("far-field warning lands in the meta blob") {
        const auto big = make_geometry({{0, 0, 0}, {0.9, 0, 0}});
        const Recording rec = render_capture(layout, big, cfg);
        CHECK(rec.meta.find("farfield_warning") != std::string::npos);
    }
}

TEST_CASE("render: per-channel gain curves shape the output") {
    const auto layout = make_polyhedral_layout(LayoutKind::rhombic_triacontahedron, 1.8, 26);
    const auto geom = make_geometry({{0, 0, 0}, {0, 1e-9, 0}}); // co-located
    CaptureConfig cfg;
    cfg.band = kBand;
    cfg.duration_s = 4.0;
    cfg.speaker_count = 2;
    cfg.seed = 13;
    cfg.channel_gains = {GainCurve{}, GainCurve::flat(3.0)};
    const Recording rec = render_capture(layout, geom, cfg);
    const double ratio = channel_power(rec.channels[1]) / channel_power(rec.channels[0]);
    CHECK(10.0 * std::log10(ratio) == doctest::Approx(3.0).epsilon(0.01));
}

TEST_CASE("gain curve interpolation") {
    GainCurve g;
    g.points = {{1000.0, 0.0}, {2000.0, 6.0}};
    CHECK(g.db_at(500.0) == 0.0);
    CHECK(g.db_at(1500.0) == doctest::Approx(3.0));
    CHECK(g.db_at(4000.0) == 6.0);
    CHECK(GainCurve{}.db_at(123.0) == 0.0);
    CHECK(GainCurve::flat(-2.5).db_at(9999.0) == -2.5);
}

TEST_CASE("fibonacci directions are unit and balanced") {
    const auto dirs = fibonacci_sphere(1000);
    Vec3 sum{};
    for (const auto& d : dirs) {
        CHECK(std::abs(norm(d) - 1.0) < 1e-12);
        sum += d;
    }
    CHECK(norm(sum) / 1000.0 < 5e-3);
    CHECK_THROWS_AS(fibonacci_sphere(0), std::invalid_argument);
}

TEST_CASE("diffuse oracle render") {
    const auto geom = make_geometry({{0, 0, 0}, {0.15, 0, 0}, {0, 0.05, 0}});

    SUBCASE("validation") {
        CHECK_THROWS_AS(render_diffuse_oracle(geom, kBand, 50, 1.0, 16000.0, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(render_diffuse_oracle(geom, kBand, 200, 1.0, 8000.0, 1),
                        std::invalid_argument);
    }

    SUBCASE("deterministic in the seed") {
        const Recording a = render_diffuse_oracle(geom, kBand, 128, 1.0, 16000.0, 4);
        const Recording b = render_diffuse_oracle(geom, kBand, 128, 1.0, 16000.0, 4);
        CHECK(a.channels[0] == b.channels[0]);
        const Recording c = render_diffuse_oracle(geom, kBand, 128, 1.0, 16000.0, 5);
        CHECK(a.channels[0] != c.channels[0]);
    }

    SUBCASE("correlation approaches the diffuse band average") {
        const Recording rec = render_diffuse_oracle(geom, kBand, 2000, 8.0, 16000.0, 42);
        CHECK(channel_power(rec.channels[0]) == doctest::Approx(1.0).epsilon(0.05));
        const double got = estimate_correlation(rec, 0, 1);
        CHECK(std::abs(got - rho_wideband_quadrature(0.15, kBand)) < 0.02);
    }

    SUBCASE("disjoint seeds agree within Monte Carlo error") {
        const Recording a = render_diffuse_oracle(geom, kBand, 2000, 8.0, 16000.0, 1001);
        const Recording b = render_diffuse_oracle(geom, kBand, 2000, 8.0, 16000.0, 1002);
        // time-noise standard error at 8 s over this band is about 0.006
        CHECK(std::abs(estimate_correlation(a, 0, 1) - estimate_correlation(b, 0, 1)) < 2.5 * 0.006);
    }

    SUBCASE("renders at the direction-count floor") {
        const Recording rec = render_diffuse_oracle(geom, kBand, 100, 4.0, 16000.0, 9);
        CHECK(rec.channel_count() == 3);
        CHECK(rec.frames() == 64000);
    }
}
