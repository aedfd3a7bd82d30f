#include "specfp/scene.hpp"

#include <cmath>
#include <set>
#include <string>

#include "specfp/errors.hpp"

namespace specfp {

void Scene::validate() const {
    if (!layout)
        throw ValidationError("scene: missing sub-band layout");
    layout->validate();

    if (spots.empty())
        throw ValidationError("scene: at least one spot is required");
    std::set<std::string> ids;
    for (const Spot& s : spots) {
        if (s.id.empty())
            throw ValidationError("scene: empty spot id");
        if (!ids.insert(s.id).second)
            throw ValidationError("scene: duplicate spot id '" + s.id + "'");
        if (!std::isfinite(s.x) || !std::isfinite(s.y))
            throw ValidationError("scene: non-finite coordinates for spot '" + s.id + "'");
    }

    for (std::size_t i = 0; i < lights.size(); ++i) {
        if (!(lights[i].emission.layout() == *layout))
            throw ValidationError("scene: light #" + std::to_string(i) +
                                  " emission uses a different layout");
    }

    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        const Surface& surf = surfaces[i];
        if (static_cast<int>(surf.reflectance.size()) != layout->count)
            throw ValidationError("scene: surface #" + std::to_string(i) + " has " +
                                  std::to_string(surf.reflectance.size()) +
                                  " reflectance entries for a " + std::to_string(layout->count) +
                                  "-band layout");
        for (double r : surf.reflectance)
            if (!std::isfinite(r) || r < 0.0 || r > 1.0)
                throw ValidationError("scene: surface #" + std::to_string(i) +
                                      " reflectance outside [0,1]");
    }

    std::set<std::string> labels;
    for (const SensorOffset& s : sensor_offsets) {
        if (s.label.empty())
            throw ValidationError("scene: empty sensor label");
        if (!labels.insert(s.label).second)
            throw ValidationError("scene: duplicate sensor label '" + s.label + "'");
    }
}

} // namespace specfp
