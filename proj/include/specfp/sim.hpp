#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specfp/dataset.hpp"
#include "specfp/scene.hpp"

namespace specfp {

/// Direct line-of-sight term: per band, emission / a^2. Throws GeometryError
/// for a <= 0 (sensor coincident with the source).
Spectrum los_contribution(const LightSource& src, double a);

/// Single-bounce term: per band, (1/c^2) * R * (emission / b^2).
Spectrum reflected_contribution(const LightSource& src, const Surface& surf, double b, double c);

/// Total reading at a sensor position: the direct term for every light plus
/// the bounce term for every (light, surface) pair, with
/// a = |sensor-light|, b = |light-surface|, c = |surface-sensor|.
Spectrum simulate_reading(const Scene& scene, const Vec3& sensor_position);

/// Group tags stamped onto generated fingerprints.
struct SessionTags {
    int day = 0;
    std::string condition = "default";
};

/// For each spot and sensor offset, simulate the clean reading, then draw
/// `samples_per_spot` noisy copies at 1 Hz timestamps. Each spot consumes its
/// own substream derived from (seed, spot id), so output is independent of
/// evaluation order.
std::vector<Fingerprint> generate_dataset(const Scene& scene, int samples_per_spot,
                                          const NoiseModel& noise, std::uint64_t seed,
                                          const SessionTags& tags = {});

} // namespace specfp
