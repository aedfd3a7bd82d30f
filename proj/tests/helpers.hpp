#pragma once

// Shared builders for unit and acceptance tests.

#include <cmath>
#include <string>
#include <vector>

#include "specfp/dataset.hpp"
#include "specfp/scene.hpp"
#include "specfp/sim.hpp"
#include "specfp/spectral.hpp"

namespace testing {

using namespace specfp;

inline Spectrum make_spectrum(const LayoutPtr& layout, std::vector<double> energy) {
    return Spectrum(layout, std::move(energy));
}

/// Small 6-band scene for fast unit tests: 2x2 spot grid, two lights with
/// different spectra, two strongly different surfaces, two sensors.
inline Scene toy_scene() {
    Scene scene;
    scene.layout = SubBandLayout::evenly_spaced(6, 410, 940);

    auto emission = [&](std::vector<double> e) { return Spectrum(scene.layout, std::move(e)); };
    scene.lights.push_back(
        LightSource{{0.5, 0.5, 2.5}, emission({9000, 7000, 5000, 4000, 3000, 2000})});
    scene.lights.push_back(
        LightSource{{1.5, 1.5, 2.5}, emission({2000, 3000, 4000, 6000, 8000, 9000})});

    scene.surfaces.push_back(Surface{{-0.5, 1.0, 1.2}, {0.8, 0.7, 0.2, 0.1, 0.05, 0.05}});
    scene.surfaces.push_back(Surface{{2.5, 1.0, 1.2}, {0.05, 0.1, 0.2, 0.6, 0.8, 0.9}});

    scene.spots = {{"a", 0.0, 0.0}, {"b", 1.0, 0.0}, {"c", 0.0, 1.0}, {"d", 1.0, 1.0}};
    scene.sensor_offsets = {{"chest", {0.1, 0.0, 1.3}}, {"wrist", {-0.2, 0.1, 0.9}}};
    return scene;
}

/// Desk-scale benchmark scene: 12 spots on a 1 m grid, three lights with
/// distinct spectra, four non-proportional surface materials, eight body-worn
/// sensors. Used by the end-to-end experiments.
inline Scene bench_scene() {
    Scene scene;
    scene.layout = SubBandLayout::as7265x();
    const int n = scene.layout->count;

    auto ramp_up = [&] {
        std::vector<double> e(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            e[static_cast<std::size_t>(i)] = 60000.0 * (0.25 + 0.75 * i / (n - 1.0));
        return Spectrum(scene.layout, e);
    };
    auto ramp_down = [&] {
        std::vector<double> e(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            e[static_cast<std::size_t>(i)] = 60000.0 * (1.0 - 0.75 * i / (n - 1.0));
        return Spectrum(scene.layout, e);
    };
    auto spiky = [&] {
        std::vector<double> e(static_cast<std::size_t>(n), 12000.0);
        for (int peak : {2, 7, 12, 16})
            e[static_cast<std::size_t>(peak)] = 72000.0;
        return Spectrum(scene.layout, e);
    };

    scene.lights.push_back(LightSource{{1.0, 1.0, 2.8}, ramp_up()});
    scene.lights.push_back(LightSource{{4.0, 1.0, 2.8}, ramp_down()});
    scene.lights.push_back(LightSource{{2.5, 3.0, 2.8}, spiky()});

    auto band_range = [&](int lo, int hi, double inside, double outside) {
        std::vector<double> r(static_cast<std::size_t>(n), outside);
        for (int i = lo; i <= hi; ++i)
            r[static_cast<std::size_t>(i)] = inside;
        return r;
    };
    scene.surfaces.push_back(Surface{{5.0, 2.0, 1.2}, band_range(8, 17, 0.85, 0.08)});  // red-ish
    scene.surfaces.push_back(Surface{{0.0, 2.0, 1.2}, band_range(0, 5, 0.80, 0.10)});   // blue-ish
    scene.surfaces.push_back(Surface{{2.5, 4.0, 1.0}, band_range(2, 9, 0.70, 0.15)});   // green-ish
    scene.surfaces.push_back(
        Surface{{2.5, 0.0, 1.5}, std::vector<double>(static_cast<std::size_t>(n), 0.55)});

    int id = 0;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 4; ++i) {
            ++id;
            scene.spots.push_back(
                Spot{"s" + std::to_string(id), 0.5 + i, 0.5 + j});
        }

    scene.sensor_offsets = {
        {"arm_left", {-0.20, 0.10, 1.10}},  {"arm_right", {0.20, -0.10, 1.10}},
        {"back", {-0.10, 0.00, 1.30}},      {"chest", {0.10, 0.00, 1.30}},
        {"leg_back", {-0.05, -0.15, 0.45}}, {"leg_front", {0.05, 0.15, 0.45}},
        {"wrist_left", {-0.25, 0.20, 0.90}}, {"wrist_right", {0.25, -0.20, 0.90}},
    };
    return scene;
}

/// Multi-day dataset from a scene with the AS7265x noise model.
inline Dataset bench_dataset(const Scene& scene, int days, int samples_per_spot,
                             std::uint64_t seed, const std::string& condition = "default") {
    NoiseModel noise;
    std::vector<Fingerprint> all;
    for (int day = 1; day <= days; ++day) {
        const std::uint64_t day_seed =
            RngStream(seed).fork("day").fork(static_cast<std::uint64_t>(day)).seed();
        std::vector<Fingerprint> fps =
            generate_dataset(scene, samples_per_spot, noise, day_seed, {day, condition});
        all.insert(all.end(), fps.begin(), fps.end());
    }
    return Dataset(scene.layout, std::move(all));
}

} // namespace testing
