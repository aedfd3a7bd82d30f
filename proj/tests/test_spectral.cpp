#include <doctest.h>

#include <vector>

#include "specfp/errors.hpp"
#include "specfp/rng.hpp"
#include "specfp/spectral.hpp"

using namespace specfp;

namespace {

LayoutPtr layout_of(int n) { return SubBandLayout::evenly_spaced(n, 410, 940); }

} // namespace

TEST_CASE("intensity is the sum of sub-band energies") {
    Spectrum s(layout_of(3), {1, 2, 3});
    CHECK(intensity_of(s).value == 6.0);
}

TEST_CASE("intensity of the zero spectrum is zero") {
    Spectrum s = Spectrum::zero(SubBandLayout::as7265x());
    CHECK(s.bands() == 18);
    CHECK(intensity_of(s).value == 0.0);
}

TEST_CASE("intensity matches a left-fold oracle on random vectors") {
    RngStream rng(101);
    LayoutPtr layout = SubBandLayout::as7265x();
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> e(18);
        for (double& v : e)
            v = rng.uniform(0.0, 5000.0);
        double expected = 0.0;
        for (double v : e)
            expected += v;
        CHECK(intensity_of(Spectrum(layout, e)).value == expected);
    }
}

TEST_CASE("spectrum_add sums element-wise") {
    LayoutPtr layout = layout_of(2);
    Spectrum a(layout, {1, 1}), b(layout, {2, 3});
    CHECK(spectrum_add(a, b).energy() == std::vector<double>{3, 4});
}

TEST_CASE("the zero spectrum is the additive identity") {
    LayoutPtr layout = layout_of(4);
    Spectrum s(layout, {5, 0, 2.5, 7});
    CHECK(spectrum_add(s, Spectrum::zero(layout)).energy() == s.energy());
}

TEST_CASE("spectrum_add matches an element-wise oracle and commutes") {
    RngStream rng(102);
    LayoutPtr layout = SubBandLayout::as7265x();
    std::vector<double> ea(18), eb(18);
    for (int i = 0; i < 18; ++i) {
        ea[static_cast<std::size_t>(i)] = rng.uniform(0, 100);
        eb[static_cast<std::size_t>(i)] = rng.uniform(0, 100);
    }
    Spectrum a(layout, ea), b(layout, eb);
    Spectrum sum = spectrum_add(a, b);
    for (int i = 0; i < 18; ++i)
        CHECK(sum[static_cast<std::size_t>(i)] ==
              ea[static_cast<std::size_t>(i)] + eb[static_cast<std::size_t>(i)]);
    CHECK(spectrum_add(b, a).energy() == sum.energy());
}

TEST_CASE("cross-layout arithmetic is rejected") {
    Spectrum a(layout_of(3), {1, 2, 3});
    Spectrum b(layout_of(4), {1, 2, 3, 4});
    CHECK_THROWS_AS(spectrum_add(a, b), LayoutMismatchError);

    // same count, different centers
    Spectrum c(SubBandLayout::evenly_spaced(3, 400, 900), {1, 2, 3});
    CHECK_THROWS_AS(spectrum_add(a, c), LayoutMismatchError);
}

TEST_CASE("equal-valued layouts loaded separately interoperate") {
    Spectrum a(layout_of(3), {1, 2, 3});
    Spectrum b(layout_of(3), {4, 5, 6});
    CHECK(spectrum_add(a, b).energy() == std::vector<double>{5, 7, 9});
}

TEST_CASE("intensity is additive and homogeneous") {
    RngStream rng(103);
    LayoutPtr layout = SubBandLayout::as7265x();
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> ea(18), eb(18);
        for (int i = 0; i < 18; ++i) {
            ea[static_cast<std::size_t>(i)] = rng.uniform(0, 3000);
            eb[static_cast<std::size_t>(i)] = rng.uniform(0, 3000);
        }
        Spectrum a(layout, ea), b(layout, eb);
        CHECK(intensity_of(spectrum_add(a, b)).value ==
              doctest::Approx(intensity_of(a).value + intensity_of(b).value).epsilon(1e-12));
        const double k = rng.uniform(0, 4);
        CHECK(intensity_of(spectrum_scale(a, k)).value ==
              doctest::Approx(k * intensity_of(a).value).epsilon(1e-12));
    }
}

TEST_CASE("spectrum invariants are enforced") {
    LayoutPtr layout = layout_of(3);
    CHECK_THROWS_AS(Spectrum(layout, {1, 2}), ValidationError);
    CHECK_THROWS_AS(Spectrum(layout, {1, -2, 3}), ValidationError);
    CHECK_THROWS_AS(Spectrum(layout, {1, std::numeric_limits<double>::quiet_NaN(), 3}),
                    ValidationError);
    CHECK_THROWS_AS(Spectrum(layout, {1, std::numeric_limits<double>::infinity(), 3}),
                    ValidationError);
    CHECK_THROWS_AS(spectrum_scale(Spectrum(layout, {1, 2, 3}), -1.0), ValidationError);
}

TEST_CASE("layout invariants are enforced") {
    SubBandLayout bad;
    bad.count = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = SubBandLayout{2, {500, 450}, 400, 900}; // not ascending
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = SubBandLayout{2, {450, 950}, 400, 900}; // outside range
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    const SubBandLayout& as = *SubBandLayout::as7265x();
    CHECK(as.count == 18);
    CHECK(as.centers.front() == 410);
    CHECK(as.centers.back() == 940);
    CHECK_NOTHROW(as.validate());
}
