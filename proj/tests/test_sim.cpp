#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "specfp/errors.hpp"
#include "specfp/preprocess.hpp"
#include "specfp/rng.hpp"
#include "specfp/sim.hpp"

using namespace specfp;
using testing::toy_scene;

namespace {

LayoutPtr layout_of(int n) { return SubBandLayout::evenly_spaced(n, 410, 940); }

LightSource light_at(Vec3 pos, std::vector<double> emission, const LayoutPtr& layout) {
    return LightSource{pos, Spectrum(layout, std::move(emission))};
}

} // namespace

TEST_CASE("direct term follows the inverse-square law") {
    LayoutPtr l1 = layout_of(1);
    LightSource src = light_at({0, 0, 0}, {100}, l1);
    CHECK(los_contribution(src, 2.0)[0] == 25.0);
    CHECK(los_contribution(src, 1.0).energy() == src.emission.energy());

    LayoutPtr l3 = layout_of(3);
    LightSource src3 = light_at({0, 0, 0}, {10, 20, 30}, l3);
    Spectrum out = los_contribution(src3, std::sqrt(10.0));
    CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(out[2] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("halving the distance quadruples the reading, exactly") {
    RngStream rng(7);
    LayoutPtr layout = SubBandLayout::as7265x();
    std::vector<double> e(18);
    for (double& v : e)
        v = rng.uniform(0, 50000);
    LightSource src = light_at({0, 0, 0}, e, layout);
    for (int trial = 0; trial < 25; ++trial) {
        const double a = rng.uniform(0.1, 10.0);
        Spectrum near = los_contribution(src, a);
        Spectrum far = los_contribution(src, 2.0 * a);
        for (int i = 0; i < 18; ++i)
            CHECK(far[static_cast<std::size_t>(i)] == near[static_cast<std::size_t>(i)] / 4.0);
    }
}

TEST_CASE("degenerate distances raise geometry errors") {
    LightSource src = light_at({0, 0, 0}, {100}, layout_of(1));
    Surface surf{{1, 0, 0}, {0.5}};
    CHECK_THROWS_AS(los_contribution(src, 0.0), GeometryError);
    CHECK_THROWS_AS(los_contribution(src, -1.0), GeometryError);
    CHECK_THROWS_AS(reflected_contribution(src, surf, 0.0, 1.0), GeometryError);
    CHECK_THROWS_AS(reflected_contribution(src, surf, 1.0, 0.0), GeometryError);
}

TEST_CASE("reflected term applies reflectance and both attenuations") {
    LayoutPtr l1 = layout_of(1);
    LightSource src = light_at({0, 0, 0}, {100}, l1);
    CHECK(reflected_contribution(src, Surface{{0, 0, 0}, {0.5}}, 1.0, 2.0)[0] == 12.5);

    // a perfect absorber contributes nothing
    CHECK(reflected_contribution(src, Surface{{0, 0, 0}, {0.0}}, 1.0, 1.0)[0] == 0.0);

    LayoutPtr l2 = layout_of(2);
    LightSource src2 = light_at({0, 0, 0}, {100, 100}, l2);
    Spectrum out = reflected_contribution(src2, Surface{{0, 0, 0}, {1.0, 0.25}}, 2.0, 1.0);
    CHECK(out[0] == 25.0);
    CHECK(out[1] == 6.25);
}

TEST_CASE("one unit-distance light and perfect reflector double the emission") {
    LayoutPtr layout = layout_of(2);
    Scene scene;
    scene.layout = layout;
    scene.lights.push_back(light_at({0, 0, 1}, {80, 40}, layout));
    // |P - light| = 1 and |P - origin| = 1
    scene.surfaces.push_back(Surface{{std::sqrt(3.0) / 2.0, 0, 0.5}, {1.0, 1.0}});
    scene.spots = {{"s", 0, 0}};
    scene.sensor_offsets = {{"sensor", {0, 0, 0}}};

    Spectrum reading = simulate_reading(scene, {0, 0, 0});
    CHECK(reading[0] == doctest::Approx(160.0).epsilon(1e-12));
    CHECK(reading[1] == doctest::Approx(80.0).epsilon(1e-12));
}

TEST_CASE("a scene without lights reads zero") {
    Scene scene = toy_scene();
    scene.lights.clear();
    Spectrum reading = simulate_reading(scene, {0.3, 0.4, 1.0});
    for (double e : reading.energy())
        CHECK(e == 0.0);
}

TEST_CASE("simulate_reading matches a term-enumeration oracle") {
    RngStream rng(31);
    LayoutPtr layout = SubBandLayout::as7265x();
    for (int trial = 0; trial < 10; ++trial) {
        Scene scene;
        scene.layout = layout;
        for (int li = 0; li < 2; ++li) {
            std::vector<double> e(18);
            for (double& v : e)
                v = rng.uniform(100, 60000);
            scene.lights.push_back(light_at(
                {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(2, 3)}, e, layout));
        }
        for (int si = 0; si < 2; ++si) {
            std::vector<double> r(18);
            for (double& v : r)
                v = rng.uniform(0, 1);
            scene.surfaces.push_back(
                Surface{{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(0, 2)}, r});
        }
        scene.spots = {{"s", 0, 0}};
        scene.sensor_offsets = {{"x", {0, 0, 1}}};

        const Vec3 sensor{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.5, 1.5)};
        Spectrum reading = simulate_reading(scene, sensor);

        // independent enumeration of all 2 + 2*2 contribution terms
        for (int band = 0; band < 18; ++band) {
            double expected = 0.0;
            for (const LightSource& light : scene.lights) {
                const double a = (sensor - light.position).norm();
                expected += light.emission[static_cast<std::size_t>(band)] / (a * a);
            }
            for (const LightSource& light : scene.lights)
                for (const Surface& surf : scene.surfaces) {
                    const double b = (light.position - surf.position).norm();
                    const double c = (surf.position - sensor).norm();
                    expected += surf.reflectance[static_cast<std::size_t>(band)] *
                                light.emission[static_cast<std::size_t>(band)] / (b * b) / (c * c);
                }
            CHECK(reading[static_cast<std::size_t>(band)] ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("a scene reading is the superposition of single-light readings") {
    Scene scene = toy_scene();
    const Vec3 sensor{0.7, 0.2, 1.1};
    Spectrum total = simulate_reading(scene, sensor);

    Spectrum sum = Spectrum::zero(scene.layout);
    for (const LightSource& light : scene.lights) {
        Scene single = scene;
        single.lights = {light};
        sum = spectrum_add(sum, simulate_reading(single, sensor));
    }
    for (int i = 0; i < scene.layout->count; ++i)
        CHECK(total[static_cast<std::size_t>(i)] ==
              doctest::Approx(sum[static_cast<std::size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("raising a reflectance never lowers the reading in that band") {
    Scene scene = toy_scene();
    const Vec3 sensor{0.4, 0.9, 1.2};
    Spectrum before = simulate_reading(scene, sensor);
    scene.surfaces[0].reflectance[2] = std::min(1.0, scene.surfaces[0].reflectance[2] + 0.5);
    Spectrum after = simulate_reading(scene, sensor);
    CHECK(after[2] > before[2]);
    for (int i = 0; i < scene.layout->count; ++i)
        if (i != 2)
            CHECK(after[static_cast<std::size_t>(i)] == before[static_cast<std::size_t>(i)]);
}

TEST_CASE("coincident geometry names the offending entity") {
    Scene scene = toy_scene();
    try {
        simulate_reading(scene, scene.lights[1].position);
        FAIL("expected GeometryError");
    } catch (const GeometryError& e) {
        CHECK(std::string(e.what()).find("light #1") != std::string::npos);
    }
    try {
        simulate_reading(scene, scene.surfaces[0].position);
        FAIL("expected GeometryError");
    } catch (const GeometryError& e) {
        CHECK(std::string(e.what()).find("surface #0") != std::string::npos);
    }
}

TEST_CASE("distinct materials make normalized readings location-dependent") {
    const Scene scene = toy_scene();
    // two spots on opposite sides of the two differently colored surfaces
    Spectrum ra = simulate_reading(scene, {0.0, 0.0, 1.0});
    Spectrum rd = simulate_reading(scene, {1.0, 1.0, 1.0});
    const std::vector<double> na = normalize(ra.energy()).values;
    const std::vector<double> nd = normalize(rd.energy()).values;
    double max_diff = 0.0;
    for (std::size_t i = 0; i < na.size(); ++i)
        max_diff = std::max(max_diff, std::abs(na[i] - nd[i]));
    CHECK(max_diff > 0.01);
}

TEST_CASE("generate_dataset yields spots x samples fingerprints with all sensors") {
    const Scene scene = toy_scene();
    NoiseModel noise; // defaults
    std::vector<Fingerprint> fps = generate_dataset(scene, 5, noise, 99);
    CHECK(fps.size() == 4 * 5);
    for (const Fingerprint& fp : fps) {
        CHECK(fp.spectra.size() == 2);
        CHECK(fp.spectra.count("chest") == 1);
        CHECK(fp.spectra.count("wrist") == 1);
    }
}

TEST_CASE("zero-noise samples equal the clean simulation exactly") {
    const Scene scene = toy_scene();
    NoiseModel noise{0.0, 0.0};
    std::vector<Fingerprint> fps = generate_dataset(scene, 1, noise, 5);
    REQUIRE(fps.size() == 4);
    for (const Fingerprint& fp : fps) {
        const Vec3 spot{fp.x, fp.y, 0.0};
        for (const SensorOffset& sensor : scene.sensor_offsets) {
            Spectrum clean = simulate_reading(scene, spot + sensor.offset);
            CHECK(fp.spectra.at(sensor.label).energy() == clean.energy());
        }
    }
}

TEST_CASE("generation is bit-identical per seed") {
    const Scene scene = toy_scene();
    NoiseModel noise;
    std::vector<Fingerprint> a = generate_dataset(scene, 4, noise, 1234);
    std::vector<Fingerprint> b = generate_dataset(scene, 4, noise, 1234);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].spot_id == b[i].spot_id);
        for (const auto& [label, spectrum] : a[i].spectra)
            CHECK(spectrum.energy() == b[i].spectra.at(label).energy());
    }

    std::vector<Fingerprint> c = generate_dataset(scene, 4, noise, 1235);
    bool all_equal = true;
    for (std::size_t i = 0; i < a.size() && all_equal; ++i)
        for (const auto& [label, spectrum] : a[i].spectra)
            if (spectrum.energy() != c[i].spectra.at(label).energy())
                all_equal = false;
    CHECK_FALSE(all_equal);
}

TEST_CASE("generate_dataset validates its inputs") {
    Scene scene = toy_scene();
    NoiseModel noise;
    CHECK_THROWS_AS(generate_dataset(scene, 0, noise, 1), ConfigError);
    scene.sensor_offsets.clear();
    CHECK_THROWS_AS(generate_dataset(scene, 1, noise, 1), ConfigError);
}
