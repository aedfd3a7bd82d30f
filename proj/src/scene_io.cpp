#include "specfp/scene_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "specfp/errors.hpp"

namespace specfp {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed,
                  const std::set<std::string>& required) {
    if (!obj.is_object())
        throw ParseError(0, where + ": expected an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw ParseError(0, where + ": unknown key '" + key + "'");
    for (const std::string& key : required)
        if (!obj.contains(key))
            throw ParseError(0, where + ": missing key '" + key + "'");
}

double get_number(const json& v, const std::string& where) {
    if (!v.is_number())
        throw ParseError(0, where + ": expected a number");
    return v.get<double>();
}

std::vector<double> get_vector(const json& v, const std::string& where) {
    if (!v.is_array())
        throw ParseError(0, where + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& e : v)
        out.push_back(get_number(e, where));
    return out;
}

Vec3 get_vec3(const json& v, const std::string& where) {
    std::vector<double> p = get_vector(v, where);
    if (p.size() != 3)
        throw ParseError(0, where + ": expected 3 components, got " + std::to_string(p.size()));
    return Vec3{p[0], p[1], p[2]};
}

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

} // namespace

Scene scene_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("scene: invalid document: ") + e.what());
    }

    require_keys(doc, "scene", {"layout", "lights", "surfaces", "spots", "sensor_offsets"},
                 {"layout", "spots", "sensor_offsets"});

    const json& jl = doc.at("layout");
    require_keys(jl, "layout", {"count", "centers", "range"}, {"count", "centers", "range"});
    SubBandLayout layout;
    layout.count = static_cast<int>(get_number(jl.at("count"), "layout.count"));
    layout.centers = get_vector(jl.at("centers"), "layout.centers");
    std::vector<double> range = get_vector(jl.at("range"), "layout.range");
    if (range.size() != 2)
        throw ParseError(0, "layout.range: expected [start, end]");
    layout.range_start = range[0];
    layout.range_end = range[1];

    Scene scene;
    try {
        scene.layout = SubBandLayout::make(std::move(layout));
    } catch (const ValidationError& e) {
        throw ParseError(0, e.what());
    }

    if (doc.contains("lights")) {
        if (!doc.at("lights").is_array())
            throw ParseError(0, "lights: expected an array");
        std::size_t i = 0;
        for (const json& jv : doc.at("lights")) {
            const std::string where = "lights[" + std::to_string(i++) + "]";
            require_keys(jv, where, {"position", "emission"}, {"position", "emission"});
            std::vector<double> emission = get_vector(jv.at("emission"), where + ".emission");
            try {
                scene.lights.push_back(LightSource{get_vec3(jv.at("position"), where + ".position"),
                                                   Spectrum(scene.layout, std::move(emission))});
            } catch (const ValidationError& e) {
                throw ParseError(0, where + ": " + e.what());
            }
        }
    }

    if (doc.contains("surfaces")) {
        if (!doc.at("surfaces").is_array())
            throw ParseError(0, "surfaces: expected an array");
        std::size_t i = 0;
        for (const json& jv : doc.at("surfaces")) {
            const std::string where = "surfaces[" + std::to_string(i++) + "]";
            require_keys(jv, where, {"position", "reflectance"}, {"position", "reflectance"});
            scene.surfaces.push_back(Surface{get_vec3(jv.at("position"), where + ".position"),
                                             get_vector(jv.at("reflectance"),
                                                        where + ".reflectance")});
        }
    }

    if (!doc.at("spots").is_array())
        throw ParseError(0, "spots: expected an array");
    std::size_t si = 0;
    for (const json& jv : doc.at("spots")) {
        const std::string where = "spots[" + std::to_string(si++) + "]";
        require_keys(jv, where, {"id", "x", "y"}, {"id", "x", "y"});
        Spot spot;
        if (jv.at("id").is_string())
            spot.id = jv.at("id").get<std::string>();
        else if (jv.at("id").is_number_integer())
            spot.id = std::to_string(jv.at("id").get<long long>());
        else
            throw ParseError(0, where + ".id: expected a string or integer");
        spot.x = get_number(jv.at("x"), where + ".x");
        spot.y = get_number(jv.at("y"), where + ".y");
        scene.spots.push_back(std::move(spot));
    }

    if (!doc.at("sensor_offsets").is_array())
        throw ParseError(0, "sensor_offsets: expected an array");
    std::size_t oi = 0;
    for (const json& jv : doc.at("sensor_offsets")) {
        const std::string where = "sensor_offsets[" + std::to_string(oi++) + "]";
        require_keys(jv, where, {"label", "offset"}, {"label", "offset"});
        if (!jv.at("label").is_string())
            throw ParseError(0, where + ".label: expected a string");
        scene.sensor_offsets.push_back(SensorOffset{jv.at("label").get<std::string>(),
                                                    get_vec3(jv.at("offset"), where + ".offset")});
    }

    try {
        scene.validate();
    } catch (const ValidationError& e) {
        throw ParseError(0, e.what());
    }
    return scene;
}

Scene read_scene(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open scene file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return scene_from_json(ss.str());
}

std::string scene_to_json(const Scene& scene) {
    json doc;
    doc["layout"] = {{"count", scene.layout->count},
                     {"centers", scene.layout->centers},
                     {"range", {scene.layout->range_start, scene.layout->range_end}}};
    doc["lights"] = json::array();
    for (const LightSource& l : scene.lights)
        doc["lights"].push_back(
            {{"position", vec3_to_json(l.position)}, {"emission", l.emission.energy()}});
    doc["surfaces"] = json::array();
    for (const Surface& s : scene.surfaces)
        doc["surfaces"].push_back(
            {{"position", vec3_to_json(s.position)}, {"reflectance", s.reflectance}});
    doc["spots"] = json::array();
    for (const Spot& s : scene.spots)
        doc["spots"].push_back({{"id", s.id}, {"x", s.x}, {"y", s.y}});
    doc["sensor_offsets"] = json::array();
    for (const SensorOffset& s : scene.sensor_offsets)
        doc["sensor_offsets"].push_back({{"label", s.label}, {"offset", vec3_to_json(s.offset)}});
    return doc.dump(2) + "\n";
}

void write_scene(const Scene& scene, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot open '" + path + "' for writing");
    out << scene_to_json(scene);
    if (!out)
        throw ConfigError("failed writing '" + path + "'");
}

} // namespace specfp
