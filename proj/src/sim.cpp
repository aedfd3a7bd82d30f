#include "specfp/sim.hpp"

#include <string>

#include "specfp/errors.hpp"

namespace specfp {

Spectrum los_contribution(const LightSource& src, double a) {
    if (!(a > 0.0))
        throw GeometryError("los_contribution: sensor coincident with light source (a = " +
                            std::to_string(a) + ")");
    std::vector<double> out(src.emission.energy());
    const double inv = 1.0 / (a * a);
    for (double& e : out)
        e *= inv;
    return Spectrum(src.emission.layout_ptr(), std::move(out));
}

Spectrum reflected_contribution(const LightSource& src, const Surface& surf, double b, double c) {
    if (!(b > 0.0))
        throw GeometryError("reflected_contribution: light coincident with surface (b = " +
                            std::to_string(b) + ")");
    if (!(c > 0.0))
        throw GeometryError("reflected_contribution: sensor coincident with surface (c = " +
                            std::to_string(c) + ")");
    if (surf.reflectance.size() != src.emission.energy().size())
        throw LayoutMismatchError("reflected_contribution: reflectance band count differs from "
                                  "the emission layout");
    std::vector<double> out(src.emission.energy());
    const double inv = 1.0 / (b * b) / (c * c);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] *= surf.reflectance[i] * inv;
    return Spectrum(src.emission.layout_ptr(), std::move(out));
}

Spectrum simulate_reading(const Scene& scene, const Vec3& sensor_position) {
    Spectrum total = Spectrum::zero(scene.layout);
    for (std::size_t li = 0; li < scene.lights.size(); ++li) {
        const LightSource& light = scene.lights[li];
        const double a = distance(sensor_position, light.position);
        if (!(a > 0.0))
            throw GeometryError("simulate_reading: sensor coincident with light #" +
                                std::to_string(li));
        total = spectrum_add(total, los_contribution(light, a));

        for (std::size_t si = 0; si < scene.surfaces.size(); ++si) {
            const Surface& surf = scene.surfaces[si];
            const double b = distance(light.position, surf.position);
            if (!(b > 0.0))
                throw GeometryError("simulate_reading: light #" + std::to_string(li) +
                                    " coincident with surface #" + std::to_string(si));
            const double c = distance(surf.position, sensor_position);
            if (!(c > 0.0))
                throw GeometryError("simulate_reading: sensor coincident with surface #" +
                                    std::to_string(si));
            total = spectrum_add(total, reflected_contribution(light, surf, b, c));
        }
    }
    return total;
}

std::vector<Fingerprint> generate_dataset(const Scene& scene, int samples_per_spot,
                                          const NoiseModel& noise, std::uint64_t seed,
                                          const SessionTags& tags) {
    scene.validate();
    noise.validate();
    if (samples_per_spot < 1)
        throw ConfigError("generate_dataset: samples_per_spot must be >= 1");
    if (scene.sensor_offsets.empty())
        throw ConfigError("generate_dataset: scene has no sensor offsets");

    const RngStream base(seed);
    std::vector<Fingerprint> out;
    out.reserve(scene.spots.size() * static_cast<std::size_t>(samples_per_spot));

    for (const Spot& spot : scene.spots) {
        // Clean readings are sample-independent; compute once per sensor.
        std::vector<Spectrum> clean;
        clean.reserve(scene.sensor_offsets.size());
        for (const SensorOffset& sensor : scene.sensor_offsets)
            clean.push_back(simulate_reading(scene, scene.spot_position(spot) + sensor.offset));

        RngStream spot_stream = base.fork(spot.id);
        for (int s = 0; s < samples_per_spot; ++s) {
            Fingerprint fp;
            fp.spot_id = spot.id;
            fp.x = spot.x;
            fp.y = spot.y;
            fp.day = tags.day;
            fp.condition = tags.condition;
            fp.timestamp = static_cast<double>(s);
            for (std::size_t i = 0; i < scene.sensor_offsets.size(); ++i)
                fp.spectra.emplace(scene.sensor_offsets[i].label,
                                   apply_noise(clean[i], noise, spot_stream));
            out.push_back(std::move(fp));
        }
    }
    return out;
}

} // namespace specfp
