#pragma once

#include <map>
#include <string>
#include <vector>

#include "specfp/dataset.hpp"
#include "specfp/model.hpp"
#include "specfp/preprocess.hpp"

namespace specfp {

/// q-quantile by linear interpolation between closest ranks:
/// position (n-1)*q between adjacent order statistics.
double percentile(std::vector<double> values, double q);

/// Percentiles for several fractions at once. Throws ConfigError when empty.
std::vector<double> error_percentiles(const std::vector<double>& errors,
                                      const std::vector<double>& qs);

struct SummaryStats {
    double median = 0.0;
    double p75 = 0.0;
    double p90 = 0.0;
    int count = 0;
};

SummaryStats summarize(const std::vector<double>& errors);

/// One evaluated test sample: truth, prediction and the derived error (m).
struct SampleRecord {
    std::string spot_id;
    double tx = 0.0, ty = 0.0; // truth
    double px = 0.0, py = 0.0; // predicted coordinates
    double error = 0.0;        // Euclidean distance
    std::string top_spot;      // argmax spot
    double snapped_error = 0.0; // distance from the argmax spot's center
    bool degenerate = false;
};

struct EvalRun {
    std::vector<SampleRecord> samples;
    SummaryStats summary;         // expected-coordinate errors
    SummaryStats summary_snapped; // argmax-spot errors
    int degenerate_count = 0;
};

struct CurvePoint {
    double x = 0.0;    // ablation x-value (sensor count or band count)
    double mean = 0.0; // mean p90 across cells
    double ci95 = 0.0; // 1.96 * sd / sqrt(cells)
    std::vector<double> cell_values;
};

struct EvalReport {
    std::string experiment;
    std::string config_json; // snapshot of the configuration that produced it
    std::map<std::string, EvalRun> runs;
    std::vector<CurvePoint> curve;
    std::map<std::string, SummaryStats> sensor_table; // single-sensor cells
};

enum class ModelKind { knn, network };

struct PipelineConfig {
    AssembleSpec assemble; // sensors empty = all; mask empty = full
    ModelKind model = ModelKind::network;
    int k = 3; // knn neighbors
    TrainConfig tcfg;
    double val_fraction = 0.1; // carved from the training side for early stopping
    std::uint64_t seed = 0;    // drives per-fold and per-cell derived seeds
    int combo_cap = 500;       // max evaluated combinations per ablation size
    int random_trials = 250;   // random sub-band masks per size
    std::vector<int> subband_sizes; // empty = every feasible size
};

/// Train a localization model on a dataset per the pipeline settings. For the
/// network model, `history` (when given) receives the per-epoch loss curve.
LocalizationModel fit_pipeline(const Dataset& train_data, const PipelineConfig& cfg,
                               std::vector<EpochStats>* history = nullptr);

/// Predict every fingerprint of a test set and collect error records.
EvalRun evaluate_model(const LocalizationModel& model, const Dataset& test);

/// Leave-one-group-out: one fold per tag, pooled per-sample errors.
EvalReport run_leave_one_out(const Dataset& d, GroupKey key, const PipelineConfig& cfg);

/// Sensor-count ablation on a fixed holdout split: every subset size from 1
/// to M, mean p90 with a 95% CI per size, plus the per-single-sensor table.
EvalReport ablate_sensor_count(const Dataset& d, const PipelineConfig& cfg, GroupKey split_key,
                               const std::string& held_out);

enum class SubBandPolicy { rgb, random };

/// Sub-band ablation sweeping mask sizes under the chosen selection policy.
EvalReport ablate_subbands(const Dataset& d, SubBandPolicy policy, const PipelineConfig& cfg,
                           GroupKey split_key, const std::string& held_out);

/// Train on one lighting condition, test on another; reports raw-input and
/// normalized-input variants side by side.
EvalReport stress_test(const Dataset& train_cond, const Dataset& test_cond,
                       const PipelineConfig& cfg);

/// Mean pairwise Euclidean distance between per-spot centroid feature vectors.
double cluster_separation(const Dataset& d, FeatureMode mode, bool normalized = true);

/// The same metric on pre-assembled feature groups (one group per spot).
double mean_centroid_distance(const std::vector<std::vector<std::vector<double>>>& groups);

std::string report_to_json(const EvalReport& report);

/// Flat CSV of per-sample records across all runs.
std::string samples_to_csv(const EvalReport& report);

/// Ablation curve as CSV (x, mean, ci95, cells).
std::string curve_to_csv(const EvalReport& report);

/// Writes <stem>.json, <stem>.samples.csv and, when a curve is present,
/// <stem>.curve.csv.
void write_report(const EvalReport& report, const std::string& stem);

} // namespace specfp
