#include <doctest.h>

#include <cmath>

#include "lbvs/hvs.hpp"
#include "test_support.hpp"

using namespace lbvs;

namespace {

HdrFrame solid_frame(int w, int h, float r, float g, float b, float scale = 1.0f) {
    HdrFrame f;
    f.width = w;
    f.height = h;
    f.luminance_scale = scale;
    f.rgb.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < f.rgb.size(); i += 3) {
        f.rgb[i] = r;
        f.rgb[i + 1] = g;
        f.rgb[i + 2] = b;
    }
    return f;
}

ViewingGeometry test_geometry() { return {1.0, 3.0, 1024}; }

}  // namespace

TEST_CASE("luminance_of applies BT.709 weights and the absolute scale") {
    const Field2D white = luminance_of(solid_frame(2, 2, 1.f, 1.f, 1.f, 100.f));
    for (double v : white.v) CHECK(v == doctest::Approx(100.0).epsilon(1e-12));

    const Field2D red = luminance_of(solid_frame(1, 1, 1.f, 0.f, 0.f));
    CHECK(red.v[0] == doctest::Approx(0.2126).epsilon(1e-12));

    const Field2D black = luminance_of(solid_frame(3, 2, 0.f, 0.f, 0.f));
    for (double v : black.v) CHECK(v == 0.0);
}

TEST_CASE("jnd_luma evaluates the linear piece and stays continuous at breakpoints") {
    CHECK(jnd_luma_value(5.6046) == doctest::Approx(17.554 * 5.6046).epsilon(1e-9));

    // Continuity within 0.1 luma where the pieces meet.
    const double y1 = 5.6046, y2 = 10469.0;
    const double lin_at_y1 = 17.554 * y1;
    const double pow_at_y1 = 826.81 * std::pow(y1, 0.10013) - 884.17;
    CHECK(std::fabs(lin_at_y1 - pow_at_y1) < 0.1);
    const double pow_at_y2 = 826.81 * std::pow(y2, 0.10013) - 884.17;
    const double log_at_y2 = 209.16 * std::log(y2) - 731.28;
    CHECK(std::fabs(pow_at_y2 - log_at_y2) < 0.1);
}

TEST_CASE("jnd_luma is strictly monotone over 1000 log-spaced luminances") {
    for (const JndVariant variant : {JndVariant::MantiukPiecewise, JndVariant::Log10}) {
        double prev = -1e300;
        for (int i = 0; i < 1000; ++i) {
            const double lg = -3.0 + 8.0 * i / 999.0;  // 1e-3 .. 1e5 cd/m^2
            const double luma = jnd_luma_value(std::pow(10.0, lg), variant);
            CHECK(luma > prev);
            prev = luma;
        }
    }
}

TEST_CASE("jnd_luma clamps below 1e-4 and rejects non-finite input") {
    CHECK(jnd_luma_value(0.0) == jnd_luma_value(1e-4));
    CHECK(jnd_luma_value(1e-9) == jnd_luma_value(1e-4));
    CHECK_THROWS_AS(jnd_luma_value(std::numeric_limits<double>::quiet_NaN()), DataError);
    CHECK(jnd_luma_value(1e-4, JndVariant::Log10) == 0.0);
}

TEST_CASE("csf_filter keeps constant fields unchanged (DC gain 1)") {
    Field2D constant(16, 12, 42.5);
    const Field2D out = csf_filter(constant, test_geometry());
    for (double v : out.v) CHECK(v == doctest::Approx(42.5).epsilon(1e-12));
}

TEST_CASE("csf_filter preserves the mean and is linear") {
    Rng rng(3);
    const Field2D a = testsupport::random_field(32, 24, rng, 0.0, 100.0);
    const Field2D b = testsupport::random_field(32, 24, rng, 0.0, 100.0);
    const ViewingGeometry geom = test_geometry();

    const Field2D fa = csf_filter(a, geom);
    CHECK(field_mean(fa) == doctest::Approx(field_mean(a)).epsilon(1e-6));

    Field2D sum(32, 24);
    for (std::size_t i = 0; i < sum.size(); ++i) sum.v[i] = a.v[i] + b.v[i];
    const Field2D fsum = csf_filter(sum, geom);
    const Field2D fb = csf_filter(b, geom);
    for (std::size_t i = 0; i < sum.size(); ++i)
        CHECK(fsum.v[i] == doctest::Approx(fa.v[i] + fb.v[i]).epsilon(1e-9));
}

TEST_CASE("csf_filter passes the peak frequency at unit gain and attenuates low frequencies") {
    // Choose geometry so that bin k0 lands exactly on the curve peak:
    // f_cpd = (k/W) * ppd.
    const int w = 256, h = 32;
    const int k0 = 32;
    const double peak = csf_peak_frequency();
    ViewingGeometry geom;
    geom.horizontal_resolution = 1024;
    geom.viewing_distance_m = 1.0;
    const double ppd_target = peak * w / k0;
    // ppd = H / angle_deg  =>  angle_deg = H / ppd.
    const double angle_deg = geom.horizontal_resolution / ppd_target;
    geom.screen_width_m = 2.0 * std::tan(angle_deg / 2.0 * M_PI / 180.0);
    REQUIRE(geom.pixels_per_degree() == doctest::Approx(ppd_target).epsilon(1e-12));

    const auto ratio_at = [&](int k) {
        Field2D f(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                f.at(x, y) = 10.0 + 4.0 * std::cos(2.0 * M_PI * k * x / w);
        const Field2D out = csf_filter(f, geom);
        return (field_max(out) - field_min(out)) / (field_max(f) - field_min(f));
    };

    CHECK(ratio_at(k0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(ratio_at(k0 / 4) < 1.0);
    // Independent evaluation of the default gain curve at both frequencies.
    CHECK(csf_gain(peak) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(csf_gain(peak / 4.0) < 1.0);
}

TEST_CASE("csf_filter rejects degenerate geometry") {
    Field2D f(4, 4, 1.0);
    CHECK_THROWS_AS(csf_filter(f, ViewingGeometry{0.0, 3.0, 1024}), DataError);
}

TEST_CASE("cam_opponents: achromatic frames give identically zero opponents") {
    for (float level : {0.0f, 0.5f, 10.0f, 1000.0f}) {
        const OpponentPair opp = cam_opponents(solid_frame(3, 3, level, level, level, 50.f), 80.0);
        for (double v : opp.rg.v) CHECK(v == 0.0);
        for (double v : opp.by.v) CHECK(v == 0.0);
    }
}

TEST_CASE("cam_opponents sign conventions and bounds") {
    const OpponentPair red = cam_opponents(solid_frame(2, 2, 1.f, 0.f, 0.f, 100.f));
    for (double v : red.rg.v) CHECK(v > 0.0);

    const OpponentPair blue = cam_opponents(solid_frame(2, 2, 0.f, 0.f, 1.f, 100.f));
    for (double v : blue.by.v) CHECK(v > 0.0);

    Rng rng(5);
    HdrFrame noisy = solid_frame(8, 8, 0.f, 0.f, 0.f, 300.f);
    for (float& s : noisy.rgb) s = static_cast<float>(rng.next_double() * 4.0);
    const OpponentPair opp = cam_opponents(noisy);
    for (const Field2D* f : {&opp.rg, &opp.by})
        for (double v : f->v) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
}

TEST_CASE("hvs stages are deterministic") {
    Rng rng(9);
    HdrFrame frame = solid_frame(16, 16, 0.f, 0.f, 0.f, 200.f);
    for (float& s : frame.rgb) s = static_cast<float>(rng.next_double());
    const Field2D lum = luminance_of(frame);
    const Field2D l1 = csf_filter(jnd_luma(lum), test_geometry());
    const Field2D l2 = csf_filter(jnd_luma(lum), test_geometry());
    for (std::size_t i = 0; i < l1.size(); ++i) CHECK(l1.v[i] == l2.v[i]);
    const OpponentPair o1 = cam_opponents(frame);
    const OpponentPair o2 = cam_opponents(frame);
    for (std::size_t i = 0; i < o1.rg.size(); ++i) {
        CHECK(o1.rg.v[i] == o2.rg.v[i]);
        CHECK(o1.by.v[i] == o2.by.v[i]);
    }
}
