#pragma once

#include <string>
#include <vector>

#include "specfp/geometry.hpp"
#include "specfp/spectral.hpp"

namespace specfp {

/// Point light with a per-band emission spectrum (energy in one direction).
struct LightSource {
    Vec3 position;
    Spectrum emission;
};

/// Point-like reflector: a position plus a per-band reflectance curve in [0,1].
struct Surface {
    Vec3 position;
    std::vector<double> reflectance;
};

/// Candidate location on the z=0 floor plane.
struct Spot {
    std::string id;
    double x = 0.0;
    double y = 0.0;
};

/// Body-worn sensor position relative to the spot a person stands on.
struct SensorOffset {
    std::string label;
    Vec3 offset;
};

struct Scene {
    LayoutPtr layout;
    std::vector<LightSource> lights;
    std::vector<Surface> surfaces;
    std::vector<Spot> spots;
    std::vector<SensorOffset> sensor_offsets;

    /// Throws ValidationError on broken invariants (duplicate spot ids, no
    /// spots, reflectance outside [0,1], spectra on a foreign layout, ...).
    void validate() const;

    Vec3 spot_position(const Spot& s) const { return {s.x, s.y, 0.0}; }
};

} // namespace specfp
