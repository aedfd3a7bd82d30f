#include "specfp/model.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "specfp/errors.hpp"

namespace specfp {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

std::string mode_name(FeatureMode m) {
    return m == FeatureMode::spectral ? "spectral" : "intensity";
}
FeatureMode mode_from(const std::string& s) {
    if (s == "spectral")
        return FeatureMode::spectral;
    if (s == "intensity")
        return FeatureMode::intensity;
    throw ParseError(0, "checkpoint: unknown feature mode '" + s + "'");
}

std::string scope_name(NormScope s) {
    return s == NormScope::per_sample ? "per_sample" : "per_sensor";
}
NormScope scope_from(const std::string& s) {
    if (s == "per_sample")
        return NormScope::per_sample;
    if (s == "per_sensor")
        return NormScope::per_sensor;
    throw ParseError(0, "checkpoint: unknown normalization scope '" + s + "'");
}

std::string order_name(LayerOrder o) {
    return o == LayerOrder::relu_then_bn ? "relu_then_bn" : "bn_then_relu";
}
LayerOrder order_from(const std::string& s) {
    if (s == "relu_then_bn")
        return LayerOrder::relu_then_bn;
    if (s == "bn_then_relu")
        return LayerOrder::bn_then_relu;
    throw ParseError(0, "checkpoint: unknown layer order '" + s + "'");
}

std::string loss_name(LossKind l) {
    return l == LossKind::squared_error ? "squared_error" : "cross_entropy";
}
LossKind loss_from(const std::string& s) {
    if (s == "squared_error")
        return LossKind::squared_error;
    if (s == "cross_entropy")
        return LossKind::cross_entropy;
    throw ParseError(0, "checkpoint: unknown loss '" + s + "'");
}

json tensor_to_json(const Tensor& t) { return json{{"shape", t.shape}, {"data", t.data}}; }

Tensor tensor_from_json(const json& j, const std::string& name) {
    if (!j.is_object() || !j.contains("shape") || !j.contains("data"))
        throw ParseError(0, "checkpoint: tensor '" + name + "' must have shape and data");
    Tensor t;
    t.shape = j.at("shape").get<std::vector<int>>();
    t.data = j.at("data").get<std::vector<double>>();
    std::size_t n = 1;
    for (int d : t.shape)
        n *= static_cast<std::size_t>(d);
    if (t.data.size() != n)
        throw ParseError(0, "checkpoint: tensor '" + name + "' data does not match its shape");
    return t;
}

json config_to_json(const TrainConfig& c) {
    return json{{"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
                {"beta1", c.beta1},           {"beta2", c.beta2},
                {"adam_eps", c.adam_eps},     {"max_epochs", c.max_epochs},
                {"patience", c.patience},     {"seed", c.seed},
                {"dropout", c.dropout},       {"hidden", c.hidden},
                {"layer_order", order_name(c.layer_order)},
                {"loss", loss_name(c.loss)}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.batch_size = j.at("batch_size").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.adam_eps = j.at("adam_eps").get<double>();
    c.max_epochs = j.at("max_epochs").get<int>();
    c.patience = j.at("patience").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.dropout = j.at("dropout").get<double>();
    c.hidden = j.at("hidden").get<int>();
    c.layer_order = order_from(j.at("layer_order").get<std::string>());
    c.loss = loss_from(j.at("loss").get<std::string>());
    return c;
}

} // namespace

Prediction predict(const LocalizationModel& model, const Fingerprint& fp) {
    if (fp.spectra.empty())
        throw ConfigError("predict: fingerprint carries no spectra");
    if (!(fp.spectra.begin()->second.layout() == *model.layout))
        throw ConfigError("predict: fingerprint layout differs from the model's layout");

    const ModelInput input = assemble(fp, model.assemble);

    Prediction out;
    out.degenerate = input.degenerate;
    if (const KnnModel* knn = std::get_if<KnnModel>(&model.impl)) {
        auto [x, y] = knn_predict(knn->points, input.values, knn->k);
        out.x = x;
        out.y = y;
        const std::size_t nearest = knn_neighbors(knn->points, input.values, 1)[0];
        const int idx = knn->points[nearest].spot_index;
        if (idx >= 0 && idx < static_cast<int>(model.spots.size()))
            out.top_spot = model.spots.spots[static_cast<std::size_t>(idx)].id;
    } else {
        const NetworkModel& net = std::get<NetworkModel>(model.impl);
        RngStream unused(0);
        ForwardResult res = forward(net.params, model.spots, input.values, RunMode::eval, unused);
        out.x = res.x;
        out.y = res.y;
        out.top_spot = model.spots.spots[static_cast<std::size_t>(res.top_spot)].id;
    }
    return out;
}

std::string model_to_json(const LocalizationModel& model) {
    json doc;
    doc["format"] = "specfp-model";
    doc["version"] = kFormatVersion;
    doc["layout"] = {{"count", model.layout->count},
                     {"centers", model.layout->centers},
                     {"range", {model.layout->range_start, model.layout->range_end}}};
    json pre;
    pre["sensors"] = model.assemble.sensors;
    pre["mode"] = mode_name(model.assemble.mode);
    if (model.assemble.mode == FeatureMode::spectral)
        pre["mask"] = model.assemble.mask.selected;
    pre["normalized"] = model.assemble.normalized;
    pre["scope"] = scope_name(model.assemble.scope);
    doc["preprocess"] = pre;

    doc["spots"] = json::array();
    for (const Spot& s : model.spots.spots)
        doc["spots"].push_back({{"id", s.id}, {"x", s.x}, {"y", s.y}});

    json m;
    if (const KnnModel* knn = std::get_if<KnnModel>(&model.impl)) {
        m["type"] = "knn";
        m["k"] = knn->k;
        m["points"] = json::array();
        for (const TrainSample& p : knn->points)
            m["points"].push_back(
                {{"input", p.input}, {"x", p.x}, {"y", p.y}, {"spot_index", p.spot_index}});
    } else {
        const NetworkModel& net = std::get<NetworkModel>(model.impl);
        const NetworkParams& p = net.params;
        m["type"] = "network";
        m["arch"] = p.arch == Arch::conv ? "conv" : "dense";
        m["input_len"] = p.input_len;
        m["hidden"] = p.hidden;
        m["dropout"] = p.dropout;
        m["layer_order"] = order_name(p.order);
        m["loss"] = loss_name(p.loss);
        m["train_config"] = config_to_json(net.config);
        json tensors;
        if (p.arch == Arch::conv) {
            m["len1"] = p.len1;
            m["len2"] = p.len2;
            tensors["conv1.w"] = tensor_to_json(p.conv1.w);
            tensors["conv1.b"] = tensor_to_json(p.conv1.b);
            tensors["bn1.gamma"] = tensor_to_json(p.bn1.gamma);
            tensors["bn1.beta"] = tensor_to_json(p.bn1.beta);
            tensors["bn1.running_mean"] = tensor_to_json(p.bn1.running_mean);
            tensors["bn1.running_var"] = tensor_to_json(p.bn1.running_var);
            tensors["conv2.w"] = tensor_to_json(p.conv2.w);
            tensors["conv2.b"] = tensor_to_json(p.conv2.b);
            tensors["bn2.gamma"] = tensor_to_json(p.bn2.gamma);
            tensors["bn2.beta"] = tensor_to_json(p.bn2.beta);
            tensors["bn2.running_mean"] = tensor_to_json(p.bn2.running_mean);
            tensors["bn2.running_var"] = tensor_to_json(p.bn2.running_var);
        }
        tensors["fc1.w"] = tensor_to_json(p.fc1.w);
        tensors["fc1.b"] = tensor_to_json(p.fc1.b);
        tensors["fc2.w"] = tensor_to_json(p.fc2.w);
        tensors["fc2.b"] = tensor_to_json(p.fc2.b);
        m["tensors"] = tensors;
    }
    doc["model"] = m;
    return doc.dump(1) + "\n";
}

LocalizationModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("checkpoint: invalid document: ") + e.what());
    }
    try {
        if (!doc.contains("version"))
            throw ParseError(0, "checkpoint: missing version field");
        if (doc.at("version").get<int>() != kFormatVersion)
            throw ParseError(0, "checkpoint: unsupported version " +
                                    doc.at("version").dump());
        if (doc.value("format", "") != "specfp-model")
            throw ParseError(0, "checkpoint: not a model file");

        LocalizationModel model;
        const json& jl = doc.at("layout");
        SubBandLayout layout;
        layout.count = jl.at("count").get<int>();
        layout.centers = jl.at("centers").get<std::vector<double>>();
        layout.range_start = jl.at("range").at(0).get<double>();
        layout.range_end = jl.at("range").at(1).get<double>();
        model.layout = SubBandLayout::make(std::move(layout));

        const json& pre = doc.at("preprocess");
        model.assemble.sensors = pre.at("sensors").get<std::vector<std::string>>();
        model.assemble.mode = mode_from(pre.at("mode").get<std::string>());
        if (model.assemble.mode == FeatureMode::spectral) {
            model.assemble.mask.selected = pre.at("mask").get<std::vector<int>>();
            model.assemble.mask.validate(model.layout->count);
        }
        model.assemble.normalized = pre.at("normalized").get<bool>();
        model.assemble.scope = scope_from(pre.at("scope").get<std::string>());

        for (const json& js : doc.at("spots"))
            model.spots.spots.push_back(Spot{js.at("id").get<std::string>(),
                                             js.at("x").get<double>(), js.at("y").get<double>()});
        model.spots.validate();

        const json& m = doc.at("model");
        const std::string type = m.at("type").get<std::string>();
        if (type == "knn") {
            KnnModel knn;
            knn.k = m.at("k").get<int>();
            for (const json& jp : m.at("points")) {
                TrainSample p;
                p.input = jp.at("input").get<std::vector<double>>();
                p.x = jp.at("x").get<double>();
                p.y = jp.at("y").get<double>();
                p.spot_index = jp.at("spot_index").get<int>();
                knn.points.push_back(std::move(p));
            }
            model.impl = std::move(knn);
        } else if (type == "network") {
            NetworkModel net;
            net.config = config_from_json(m.at("train_config"));
            NetworkParams& p = net.params;
            const std::string arch = m.at("arch").get<std::string>();
            p.arch = arch == "conv" ? Arch::conv : Arch::dense;
            p.input_len = m.at("input_len").get<int>();
            p.num_spots = static_cast<int>(model.spots.size());
            p.hidden = m.at("hidden").get<int>();
            p.dropout = m.at("dropout").get<double>();
            p.order = order_from(m.at("layer_order").get<std::string>());
            p.loss = loss_from(m.at("loss").get<std::string>());
            const json& tensors = m.at("tensors");
            auto load = [&tensors](const std::string& name) {
                return tensor_from_json(tensors.at(name), name);
            };
            if (p.arch == Arch::conv) {
                p.len1 = m.at("len1").get<int>();
                p.len2 = m.at("len2").get<int>();
                p.conv1 = ConvLayer{1, 32, 3, 2, load("conv1.w"), load("conv1.b")};
                p.bn1.channels = 32;
                p.bn1.gamma = load("bn1.gamma");
                p.bn1.beta = load("bn1.beta");
                p.bn1.running_mean = load("bn1.running_mean");
                p.bn1.running_var = load("bn1.running_var");
                p.conv2 = ConvLayer{32, 64, 3, 2, load("conv2.w"), load("conv2.b")};
                p.bn2.channels = 64;
                p.bn2.gamma = load("bn2.gamma");
                p.bn2.beta = load("bn2.beta");
                p.bn2.running_mean = load("bn2.running_mean");
                p.bn2.running_var = load("bn2.running_var");
            }
            p.fc1.w = load("fc1.w");
            p.fc1.b = load("fc1.b");
            p.fc1.out = p.fc1.w.shape.at(0);
            p.fc1.in = p.fc1.w.shape.at(1);
            p.fc2.w = load("fc2.w");
            p.fc2.b = load("fc2.b");
            p.fc2.out = p.fc2.w.shape.at(0);
            p.fc2.in = p.fc2.w.shape.at(1);
            model.impl = std::move(net);
        } else {
            throw ParseError(0, "checkpoint: unknown model type '" + type + "'");
        }
        return model;
    } catch (const json::exception& e) {
        throw ParseError(0, std::string("checkpoint: ") + e.what());
    }
}

void save_model(const LocalizationModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot open '" + path + "' for writing");
    out << model_to_json(model);
    if (!out)
        throw ConfigError("failed writing '" + path + "'");
}

LocalizationModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

} // namespace specfp
