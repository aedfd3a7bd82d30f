#pragma once

#include <string>
#include <variant>
#include <vector>

#include "specfp/dataset.hpp"
#include "specfp/knn.hpp"
#include "specfp/nn.hpp"
#include "specfp/preprocess.hpp"

namespace specfp {

/// Brute-force baseline: stored assembled fingerprints with coordinates.
struct KnnModel {
    int k = 3;
    std::vector<TrainSample> points;
};

struct NetworkModel {
    NetworkParams params;
    TrainConfig config;
};

/// A trained localization predictor plus everything needed to reproduce its
/// input assembly. Checkpoints round-trip through save_model/load_model.
struct LocalizationModel {
    LayoutPtr layout;
    AssembleSpec assemble; // resolved: concrete sensor list and mask
    SpotTable spots;
    std::variant<KnnModel, NetworkModel> impl;
};

struct Prediction {
    double x = 0.0;
    double y = 0.0;
    std::string top_spot;    // argmax spot (network) or nearest neighbor's spot (knn)
    bool degenerate = false; // input had no spectral shape (all-equal vector)
};

/// Assemble the fingerprint per the model's preprocessing and predict.
/// Throws ConfigError when the fingerprint does not match the model's layout
/// or sensor set.
Prediction predict(const LocalizationModel& model, const Fingerprint& fp);

/// Deterministic checkpoint serialization: identical models produce
/// byte-identical documents. Contains a format version, the layout, the
/// preprocessing spec, the spot table and every tensor with its shape.
std::string model_to_json(const LocalizationModel& model);

LocalizationModel model_from_json(const std::string& text);

void save_model(const LocalizationModel& model, const std::string& path);

LocalizationModel load_model(const std::string& path);

} // namespace specfp
