#pragma once

#include <string>

#include "specfp/scene.hpp"

namespace specfp {

/// Parse a scene description document. Unknown keys are rejected.
///
/// Schema:
///   {
///     "layout": {"count": N, "centers": [...], "range": [start, end]},
///     "lights": [{"position": [x,y,z], "emission": [N values]}],
///     "surfaces": [{"position": [x,y,z], "reflectance": [N values in 0..1]}],
///     "spots": [{"id": "...", "x": ..., "y": ...}],
///     "sensor_offsets": [{"label": "...", "offset": [dx,dy,dz]}]
///   }
Scene scene_from_json(const std::string& text);

Scene read_scene(const std::string& path);

std::string scene_to_json(const Scene& scene);

void write_scene(const Scene& scene, const std::string& path);

} // namespace specfp
