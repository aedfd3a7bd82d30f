#include "specfp/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "specfp/errors.hpp"
#include "specfp/rng.hpp"

namespace specfp {

using nlohmann::json;

double percentile(std::vector<double> values, double q) {
    if (values.empty())
        throw ConfigError("percentile: empty value list");
    if (!(q >= 0.0 && q <= 1.0))
        throw ConfigError("percentile: fraction must lie in [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = static_cast<double>(values.size() - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size())
        return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::vector<double> error_percentiles(const std::vector<double>& errors,
                                      const std::vector<double>& qs) {
    std::vector<double> out;
    out.reserve(qs.size());
    for (double q : qs)
        out.push_back(percentile(errors, q));
    return out;
}

SummaryStats summarize(const std::vector<double>& errors) {
    SummaryStats s;
    s.count = static_cast<int>(errors.size());
    if (errors.empty())
        return s;
    const std::vector<double> p = error_percentiles(errors, {0.5, 0.75, 0.9});
    s.median = p[0];
    s.p75 = p[1];
    s.p90 = p[2];
    return s;
}

namespace {

std::uint64_t derive_seed(std::uint64_t base, const std::string& label) {
    return RngStream(base).fork(label).seed();
}

std::vector<TrainSample> assemble_samples(const Dataset& d, const AssembleSpec& spec,
                                          const SpotTable& spots) {
    std::vector<TrainSample> out;
    out.reserve(d.size());
    for (const Fingerprint& fp : d.fingerprints()) {
        TrainSample s;
        s.input = assemble(fp, spec).values;
        s.x = fp.x;
        s.y = fp.y;
        s.spot_index = spots.index_of(fp.spot_id);
        out.push_back(std::move(s));
    }
    return out;
}

std::string mode_label(FeatureMode m) {
    return m == FeatureMode::spectral ? "spectral" : "intensity";
}

json assemble_to_json(const AssembleSpec& spec) {
    json j;
    j["sensors"] = spec.sensors;
    j["mode"] = mode_label(spec.mode);
    j["mask"] = spec.mask.selected;
    j["normalized"] = spec.normalized;
    j["scope"] = spec.scope == NormScope::per_sample ? "per_sample" : "per_sensor";
    return j;
}

json pipeline_to_json(const PipelineConfig& cfg) {
    json j;
    j["assemble"] = assemble_to_json(cfg.assemble);
    j["model"] = cfg.model == ModelKind::knn ? "knn" : "network";
    j["k"] = cfg.k;
    j["train"] = {{"batch_size", cfg.tcfg.batch_size},
                  {"learning_rate", cfg.tcfg.learning_rate},
                  {"max_epochs", cfg.tcfg.max_epochs},
                  {"patience", cfg.tcfg.patience},
                  {"dropout", cfg.tcfg.dropout},
                  {"hidden", cfg.tcfg.hidden},
                  {"seed", cfg.tcfg.seed}};
    j["val_fraction"] = cfg.val_fraction;
    j["seed"] = cfg.seed;
    j["combo_cap"] = cfg.combo_cap;
    j["random_trials"] = cfg.random_trials;
    return j;
}

// All k-subsets of {0..n-1}, lexicographic.
std::vector<std::vector<int>> index_combinations(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(k));
    std::iota(cur.begin(), cur.end(), 0);
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - k + i)
            --i;
        if (i < 0)
            break;
        ++cur[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

template <typename T>
void cap_cells(std::vector<T>& cells, int cap, RngStream rng) {
    if (cap > 0 && static_cast<int>(cells.size()) > cap) {
        rng.shuffle(cells);
        cells.resize(static_cast<std::size_t>(cap));
    }
}

CurvePoint make_curve_point(double x, std::vector<double> values) {
    CurvePoint p;
    p.x = x;
    p.cell_values = std::move(values);
    const std::size_t n = p.cell_values.size();
    for (double v : p.cell_values)
        p.mean += v;
    p.mean /= static_cast<double>(n);
    if (n > 1) {
        double sq = 0.0;
        for (double v : p.cell_values) {
            const double d = v - p.mean;
            sq += d * d;
        }
        const double sd = std::sqrt(sq / static_cast<double>(n - 1));
        p.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(n));
    }
    return p;
}

void append_number(std::string& out, double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

json summary_to_json(const SummaryStats& s) {
    return json{{"median", s.median}, {"p75", s.p75}, {"p90", s.p90}, {"count", s.count}};
}

} // namespace

LocalizationModel fit_pipeline(const Dataset& train_data, const PipelineConfig& cfg,
                               std::vector<EpochStats>* history) {
    const AssembleSpec spec = resolve_spec(cfg.assemble, train_data);

    LocalizationModel model;
    model.layout = train_data.layout();
    model.assemble = spec;
    model.spots.spots = train_data.spots();
    model.spots.validate();

    std::vector<TrainSample> samples = assemble_samples(train_data, spec, model.spots);

    if (cfg.model == ModelKind::knn) {
        KnnModel knn;
        knn.k = cfg.k;
        if (knn.k < 1 || static_cast<std::size_t>(knn.k) > samples.size())
            throw ConfigError("pipeline: knn k=" + std::to_string(knn.k) +
                              " with a training set of " + std::to_string(samples.size()));
        knn.points = std::move(samples);
        model.impl = std::move(knn);
        return model;
    }

    if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0))
        throw ConfigError("pipeline: val_fraction must lie in (0,1)");
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    RngStream split_rng = RngStream(cfg.tcfg.seed).fork("val-split");
    split_rng.shuffle(order);
    std::size_t n_val = static_cast<std::size_t>(
        std::ceil(cfg.val_fraction * static_cast<double>(samples.size())));
    n_val = std::max<std::size_t>(1, std::min(n_val, samples.size() - 1));
    if (samples.size() < 2)
        throw ConfigError("pipeline: need at least 2 samples to train the network");

    std::vector<TrainSample> val_set, train_set;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i < n_val)
            val_set.push_back(samples[order[i]]);
        else
            train_set.push_back(samples[order[i]]);
    }

    TrainResult result = train(cfg.tcfg, train_set, val_set, model.spots);
    if (history)
        *history = result.history;
    model.impl = NetworkModel{std::move(result.params), cfg.tcfg};
    return model;
}

EvalRun evaluate_model(const LocalizationModel& model, const Dataset& test) {
    EvalRun run;
    run.samples.reserve(test.size());
    std::vector<double> errors, snapped;
    errors.reserve(test.size());
    snapped.reserve(test.size());

    for (const Fingerprint& fp : test.fingerprints()) {
        const Prediction pred = predict(model, fp);
        SampleRecord rec;
        rec.spot_id = fp.spot_id;
        rec.tx = fp.x;
        rec.ty = fp.y;
        rec.px = pred.x;
        rec.py = pred.y;
        rec.error = std::hypot(pred.x - fp.x, pred.y - fp.y);
        rec.top_spot = pred.top_spot;
        const int idx = model.spots.index_of(pred.top_spot);
        if (idx >= 0) {
            const Spot& s = model.spots.spots[static_cast<std::size_t>(idx)];
            rec.snapped_error = std::hypot(s.x - fp.x, s.y - fp.y);
        }
        rec.degenerate = pred.degenerate;
        if (rec.degenerate)
            ++run.degenerate_count;
        errors.push_back(rec.error);
        snapped.push_back(rec.snapped_error);
        run.samples.push_back(std::move(rec));
    }
    run.summary = summarize(errors);
    run.summary_snapped = summarize(snapped);
    return run;
}

EvalReport run_leave_one_out(const Dataset& d, GroupKey key, const PipelineConfig& cfg) {
    std::vector<std::string> tags;
    if (key == GroupKey::day) {
        for (int day : d.days())
            tags.push_back(std::to_string(day));
    } else {
        tags = d.conditions();
        std::sort(tags.begin(), tags.end());
    }
    if (tags.size() < 2)
        throw ConfigError("leave-one-out: need at least 2 groups, found " +
                          std::to_string(tags.size()));

    EvalReport report;
    report.experiment = "leave_one_out";
    json cfg_json = pipeline_to_json(cfg);
    cfg_json["group_key"] = key == GroupKey::day ? "day" : "condition";
    report.config_json = cfg_json.dump();

    EvalRun pooled;
    std::vector<double> pooled_errors, pooled_snapped;
    for (const std::string& tag : tags) {
        auto [train_ds, test_ds] = split_leave_one_group_out(d, key, tag);
        PipelineConfig fold_cfg = cfg;
        fold_cfg.tcfg.seed = derive_seed(cfg.seed, "fold:" + tag);
        const LocalizationModel model = fit_pipeline(train_ds, fold_cfg);
        EvalRun run = evaluate_model(model, test_ds);
        for (const SampleRecord& rec : run.samples) {
            pooled_errors.push_back(rec.error);
            pooled_snapped.push_back(rec.snapped_error);
            pooled.samples.push_back(rec);
        }
        pooled.degenerate_count += run.degenerate_count;
        report.runs["fold:" + tag] = std::move(run);
    }
    pooled.summary = summarize(pooled_errors);
    pooled.summary_snapped = summarize(pooled_snapped);
    report.runs["pooled"] = std::move(pooled);
    return report;
}

EvalReport ablate_sensor_count(const Dataset& d, const PipelineConfig& cfg, GroupKey split_key,
                               const std::string& held_out) {
    const std::vector<std::string>& sensors = d.sensors();
    const int m = static_cast<int>(sensors.size());
    if (m < 2)
        throw ConfigError("sensor ablation: need at least 2 sensors");

    auto [train_ds, test_ds] = split_leave_one_group_out(d, split_key, held_out);

    EvalReport report;
    report.experiment = "ablate_sensors";
    json cfg_json = pipeline_to_json(cfg);
    cfg_json["split_key"] = split_key == GroupKey::day ? "day" : "condition";
    cfg_json["held_out"] = held_out;
    report.config_json = cfg_json.dump();

    for (int n = 1; n <= m; ++n) {
        std::vector<std::vector<int>> combos = index_combinations(m, n);
        cap_cells(combos, cfg.combo_cap,
                  RngStream(derive_seed(cfg.seed, "sensors-cap:" + std::to_string(n))));

        std::vector<double> p90s;
        p90s.reserve(combos.size());
        for (const std::vector<int>& combo : combos) {
            PipelineConfig cell = cfg;
            cell.assemble.sensors.clear();
            std::string label = "sensors:";
            for (int idx : combo) {
                cell.assemble.sensors.push_back(sensors[static_cast<std::size_t>(idx)]);
                label += sensors[static_cast<std::size_t>(idx)] + ",";
            }
            cell.tcfg.seed = derive_seed(cfg.seed, label);
            const LocalizationModel model = fit_pipeline(train_ds, cell);
            EvalRun run = evaluate_model(model, test_ds);
            p90s.push_back(run.summary.p90);
            if (n == 1)
                report.sensor_table[cell.assemble.sensors.front()] = run.summary;
            if (n == m)
                report.runs["all_sensors"] = std::move(run);
        }
        report.curve.push_back(make_curve_point(static_cast<double>(n), std::move(p90s)));
    }
    return report;
}

EvalReport ablate_subbands(const Dataset& d, SubBandPolicy policy, const PipelineConfig& cfg,
                           GroupKey split_key, const std::string& held_out) {
    const int n_bands = d.layout()->count;
    if (n_bands < 2)
        throw ConfigError("sub-band ablation: need a spectral layout with at least 2 bands");

    auto [train_ds, test_ds] = split_leave_one_group_out(d, split_key, held_out);

    EvalReport report;
    report.experiment = policy == SubBandPolicy::rgb ? "ablate_subbands_rgb"
                                                     : "ablate_subbands_random";
    json cfg_json = pipeline_to_json(cfg);
    cfg_json["split_key"] = split_key == GroupKey::day ? "day" : "condition";
    cfg_json["held_out"] = held_out;
    cfg_json["policy"] = policy == SubBandPolicy::rgb ? "rgb" : "random";
    report.config_json = cfg_json.dump();

    std::vector<int> sizes = cfg.subband_sizes;
    if (sizes.empty()) {
        if (policy == SubBandPolicy::rgb) {
            for (int k = 1; k <= n_bands / 3; ++k)
                sizes.push_back(3 * k);
        } else {
            for (int n = 1; n <= n_bands; ++n)
                sizes.push_back(n);
        }
    }

    for (int size : sizes) {
        std::vector<SubBandMask> masks;
        if (policy == SubBandPolicy::rgb) {
            if (size % 3 != 0)
                throw ConfigError("rgb policy: size " + std::to_string(size) +
                                  " is not a multiple of 3");
            masks = rgb_restricted_masks(size / 3, n_bands);
        } else {
            masks = random_masks(size, cfg.random_trials,
                                 derive_seed(cfg.seed, "masks:" + std::to_string(size)), n_bands);
        }
        cap_cells(masks, cfg.combo_cap,
                  RngStream(derive_seed(cfg.seed, "bands-cap:" + std::to_string(size))));

        std::vector<double> p90s;
        p90s.reserve(masks.size());
        for (std::size_t mi = 0; mi < masks.size(); ++mi) {
            PipelineConfig cell = cfg;
            cell.assemble.mode = FeatureMode::spectral;
            cell.assemble.mask = masks[mi];
            cell.tcfg.seed = derive_seed(cfg.seed, "mask:" + std::to_string(size) + ":" +
                                                       std::to_string(mi));
            const LocalizationModel model = fit_pipeline(train_ds, cell);
            EvalRun run = evaluate_model(model, test_ds);
            p90s.push_back(run.summary.p90);
            if (size == n_bands)
                report.runs["all_bands"] = std::move(run);
        }
        report.curve.push_back(make_curve_point(static_cast<double>(size), std::move(p90s)));
    }
    return report;
}

EvalReport stress_test(const Dataset& train_cond, const Dataset& test_cond,
                       const PipelineConfig& cfg) {
    if (!(*train_cond.layout() == *test_cond.layout()))
        throw ConfigError("stress test: datasets use different layouts");
    if (train_cond.sensors() != test_cond.sensors())
        throw ConfigError("stress test: datasets carry different sensor sets");

    EvalReport report;
    report.experiment = "stress_test";
    report.config_json = pipeline_to_json(cfg).dump();

    for (bool normalized : {false, true}) {
        PipelineConfig variant = cfg;
        variant.assemble.normalized = normalized;
        variant.tcfg.seed = derive_seed(cfg.seed, normalized ? "normalized" : "raw");
        const LocalizationModel model = fit_pipeline(train_cond, variant);
        report.runs[normalized ? "normalized" : "raw"] = evaluate_model(model, test_cond);
    }
    return report;
}

double mean_centroid_distance(const std::vector<std::vector<std::vector<double>>>& groups) {
    if (groups.size() < 2)
        throw ConfigError("cluster separation: need at least 2 groups");
    std::vector<std::vector<double>> centroids;
    for (const auto& group : groups) {
        if (group.empty())
            throw ConfigError("cluster separation: empty group");
        std::vector<double> c(group.front().size(), 0.0);
        for (const auto& v : group) {
            if (v.size() != c.size())
                throw ShapeError("cluster separation: inconsistent feature lengths");
            for (std::size_t i = 0; i < v.size(); ++i)
                c[i] += v[i];
        }
        for (double& value : c)
            value /= static_cast<double>(group.size());
        centroids.push_back(std::move(c));
    }

    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < centroids.size(); ++i)
        for (std::size_t j = i + 1; j < centroids.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t v = 0; v < centroids[i].size(); ++v) {
                const double d = centroids[i][v] - centroids[j][v];
                d2 += d * d;
            }
            total += std::sqrt(d2);
            ++pairs;
        }
    return total / static_cast<double>(pairs);
}

double cluster_separation(const Dataset& d, FeatureMode mode, bool normalized) {
    if (d.spots().size() < 2)
        throw ConfigError("cluster separation: need at least 2 spots");
    AssembleSpec spec;
    spec.mode = mode;
    spec.normalized = normalized;
    spec = resolve_spec(spec, d);

    std::map<std::string, std::size_t> group_of;
    std::vector<std::vector<std::vector<double>>> groups;
    for (const Spot& s : d.spots()) {
        group_of[s.id] = groups.size();
        groups.emplace_back();
    }
    for (const Fingerprint& fp : d.fingerprints())
        groups[group_of.at(fp.spot_id)].push_back(assemble(fp, spec).values);
    return mean_centroid_distance(groups);
}

namespace {

json run_to_json(const EvalRun& run) {
    json j;
    j["summary"] = summary_to_json(run.summary);
    j["summary_snapped"] = summary_to_json(run.summary_snapped);
    j["degenerate_samples"] = run.degenerate_count;
    j["samples"] = json::array();
    for (const SampleRecord& rec : run.samples)
        j["samples"].push_back({{"spot_id", rec.spot_id},
                                {"tx", rec.tx},
                                {"ty", rec.ty},
                                {"px", rec.px},
                                {"py", rec.py},
                                {"error", rec.error},
                                {"top_spot", rec.top_spot},
                                {"snapped_error", rec.snapped_error},
                                {"degenerate", rec.degenerate}});
    return j;
}

} // namespace

std::string report_to_json(const EvalReport& report) {
    json doc;
    doc["experiment"] = report.experiment;
    doc["config"] = report.config_json.empty() ? json::object() : json::parse(report.config_json);
    doc["runs"] = json::object();
    for (const auto& [name, run] : report.runs)
        doc["runs"][name] = run_to_json(run);
    if (!report.curve.empty()) {
        doc["curve"] = json::array();
        for (const CurvePoint& p : report.curve)
            doc["curve"].push_back({{"x", p.x},
                                    {"mean", p.mean},
                                    {"ci95", p.ci95},
                                    {"cells", p.cell_values.size()},
                                    {"cell_values", p.cell_values}});
    }
    if (!report.sensor_table.empty()) {
        doc["sensor_table"] = json::object();
        for (const auto& [label, stats] : report.sensor_table)
            doc["sensor_table"][label] = summary_to_json(stats);
    }
    return doc.dump(1) + "\n";
}

std::string samples_to_csv(const EvalReport& report) {
    std::string out = "run,spot_id,tx,ty,px,py,error,top_spot,snapped_error,degenerate\n";
    for (const auto& [name, run] : report.runs)
        for (const SampleRecord& rec : run.samples) {
            out += name + ',' + rec.spot_id + ',';
            append_number(out, rec.tx);
            out += ',';
            append_number(out, rec.ty);
            out += ',';
            append_number(out, rec.px);
            out += ',';
            append_number(out, rec.py);
            out += ',';
            append_number(out, rec.error);
            out += ',';
            out += rec.top_spot;
            out += ',';
            append_number(out, rec.snapped_error);
            out += ',';
            out += rec.degenerate ? '1' : '0';
            out += '\n';
        }
    return out;
}

std::string curve_to_csv(const EvalReport& report) {
    std::string out = "x,mean,ci95,cells\n";
    for (const CurvePoint& p : report.curve) {
        append_number(out, p.x);
        out += ',';
        append_number(out, p.mean);
        out += ',';
        append_number(out, p.ci95);
        out += ',';
        out += std::to_string(p.cell_values.size());
        out += '\n';
    }
    return out;
}

void write_report(const EvalReport& report, const std::string& stem) {
    auto write_file = [](const std::string& path, const std::string& content) {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw ConfigError("cannot open '" + path + "' for writing");
        out << content;
        if (!out)
            throw ConfigError("failed writing '" + path + "'");
    };
    write_file(stem + ".json", report_to_json(report));
    write_file(stem + ".samples.csv", samples_to_csv(report));
    if (!report.curve.empty())
        write_file(stem + ".curve.csv", curve_to_csv(report));
}

} // namespace specfp
