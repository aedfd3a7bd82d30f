// specfp command-line front end: scene simulation, training, evaluation,
// ablations and cross-condition stress tests as reproducible runs.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specfp/dataset.hpp"
#include "specfp/errors.hpp"
#include "specfp/eval.hpp"
#include "specfp/model.hpp"
#include "specfp/scene_io.hpp"
#include "specfp/sim.hpp"

namespace {

using nlohmann::json;
using namespace specfp;

json load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        json doc = json::parse(ss.str());
        if (!doc.is_object())
            throw ConfigError("config file '" + path + "' must hold a JSON object");
        return doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
}

// Flags override config-file values; the config supplies defaults.
template <typename T>
void merge(const CLI::App& app, const std::string& flag, const json& cfg, const std::string& key,
           std::optional<T>& value) {
    if (app.count(flag) > 0)
        return; // explicit flag wins
    if (cfg.contains(key)) {
        try {
            value = cfg.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
}

struct HoldoutSpec {
    GroupKey key = GroupKey::day;
    std::string tag;
};

HoldoutSpec parse_holdout(const std::string& text) {
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos)
        throw ConfigError("holdout must look like day=3 or condition=<tag>, got '" + text + "'");
    const std::string key = text.substr(0, eq);
    HoldoutSpec spec;
    spec.tag = text.substr(eq + 1);
    if (key == "day")
        spec.key = GroupKey::day;
    else if (key == "condition")
        spec.key = GroupKey::condition;
    else
        throw ConfigError("holdout group must be 'day' or 'condition', got '" + key + "'");
    if (spec.tag.empty())
        throw ConfigError("holdout tag is empty");
    return spec;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot open '" + path + "' for writing");
    out << content;
    if (!out)
        throw ConfigError("failed writing '" + path + "'");
}

// Every run leaves a config snapshot next to its primary output.
void write_snapshot(const std::string& out_path, const json& snapshot) {
    write_text(out_path + ".config.json", snapshot.dump(1) + "\n");
}

// Shared pipeline options for train/ablate/stress.
struct PipelineOptions {
    std::optional<std::vector<std::string>> sensors;
    std::optional<std::vector<int>> mask;
    std::optional<bool> intensity;
    std::optional<bool> raw;
    std::optional<std::string> norm_scope;
    std::optional<std::string> model_type;
    std::optional<int> k;
    std::optional<int> batch_size;
    std::optional<double> learning_rate;
    std::optional<int> max_epochs;
    std::optional<int> patience;
    std::optional<double> dropout;
    std::optional<int> hidden;
    std::optional<std::string> layer_order;
    std::optional<std::string> loss;
    std::optional<double> val_fraction;
    std::optional<int> combo_cap;
    std::optional<int> trials;
    std::optional<std::vector<int>> sizes;

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--sensors", sensors, "Comma-separated sensor labels (default: all)")
            ->delimiter(',');
        cmd->add_option("--mask", mask, "Comma-separated band indices (default: all)")
            ->delimiter(',');
        cmd->add_flag("--intensity", intensity, "Use per-sensor intensity instead of spectra");
        cmd->add_flag("--raw", raw, "Skip input normalization");
        cmd->add_option("--norm-scope", norm_scope, "per_sample|per_sensor");
        cmd->add_option("--model-type", model_type, "network|knn");
        cmd->add_option("--k", k, "kNN neighbor count");
        cmd->add_option("--batch", batch_size, "Mini-batch size");
        cmd->add_option("--lr", learning_rate, "Adam learning rate");
        cmd->add_option("--epochs", max_epochs, "Maximum training epochs");
        cmd->add_option("--patience", patience, "Early-stopping patience");
        cmd->add_option("--dropout", dropout, "Dropout rate between the dense layers");
        cmd->add_option("--hidden", hidden, "Hidden width of the first dense layer");
        cmd->add_option("--layer-order", layer_order, "relu_then_bn|bn_then_relu");
        cmd->add_option("--loss", loss, "squared_error|cross_entropy");
        cmd->add_option("--val-fraction", val_fraction, "Validation carve-out fraction");
        cmd->add_option("--combo-cap", combo_cap, "Max combinations per ablation size");
        cmd->add_option("--trials", trials, "Random masks per sub-band size");
        cmd->add_option("--sizes", sizes, "Sub-band sizes to sweep")->delimiter(',');
    }

    void merge_config(const CLI::App& cmd, const json& cfg) {
        merge(cmd, "--sensors", cfg, "sensors", sensors);
        merge(cmd, "--mask", cfg, "mask", mask);
        merge(cmd, "--intensity", cfg, "intensity", intensity);
        merge(cmd, "--raw", cfg, "raw", raw);
        merge(cmd, "--norm-scope", cfg, "norm_scope", norm_scope);
        merge(cmd, "--model-type", cfg, "model_type", model_type);
        merge(cmd, "--k", cfg, "k", k);
        merge(cmd, "--batch", cfg, "batch_size", batch_size);
        merge(cmd, "--lr", cfg, "learning_rate", learning_rate);
        merge(cmd, "--epochs", cfg, "max_epochs", max_epochs);
        merge(cmd, "--patience", cfg, "patience", patience);
        merge(cmd, "--dropout", cfg, "dropout", dropout);
        merge(cmd, "--hidden", cfg, "hidden", hidden);
        merge(cmd, "--layer-order", cfg, "layer_order", layer_order);
        merge(cmd, "--loss", cfg, "loss", loss);
        merge(cmd, "--val-fraction", cfg, "val_fraction", val_fraction);
        merge(cmd, "--combo-cap", cfg, "combo_cap", combo_cap);
        merge(cmd, "--trials", cfg, "trials", trials);
        merge(cmd, "--sizes", cfg, "sizes", sizes);
    }

    PipelineConfig resolve(std::uint64_t seed) const {
        PipelineConfig cfg;
        cfg.seed = seed;
        cfg.tcfg.seed = seed;
        if (sensors)
            cfg.assemble.sensors = *sensors;
        if (mask)
            cfg.assemble.mask.selected = *mask;
        if (intensity && *intensity)
            cfg.assemble.mode = FeatureMode::intensity;
        if (raw && *raw)
            cfg.assemble.normalized = false;
        if (norm_scope) {
            if (*norm_scope == "per_sample")
                cfg.assemble.scope = NormScope::per_sample;
            else if (*norm_scope == "per_sensor")
                cfg.assemble.scope = NormScope::per_sensor;
            else
                throw ConfigError("norm-scope must be per_sample or per_sensor");
        }
        if (model_type) {
            if (*model_type == "network")
                cfg.model = ModelKind::network;
            else if (*model_type == "knn")
                cfg.model = ModelKind::knn;
            else
                throw ConfigError("model-type must be network or knn");
        }
        if (k)
            cfg.k = *k;
        if (batch_size)
            cfg.tcfg.batch_size = *batch_size;
        if (learning_rate)
            cfg.tcfg.learning_rate = *learning_rate;
        if (max_epochs)
            cfg.tcfg.max_epochs = *max_epochs;
        if (patience)
            cfg.tcfg.patience = *patience;
        if (dropout)
            cfg.tcfg.dropout = *dropout;
        if (hidden)
            cfg.tcfg.hidden = *hidden;
        if (layer_order) {
            if (*layer_order == "relu_then_bn")
                cfg.tcfg.layer_order = LayerOrder::relu_then_bn;
            else if (*layer_order == "bn_then_relu")
                cfg.tcfg.layer_order = LayerOrder::bn_then_relu;
            else
                throw ConfigError("layer-order must be relu_then_bn or bn_then_relu");
        }
        if (loss) {
            if (*loss == "squared_error")
                cfg.tcfg.loss = LossKind::squared_error;
            else if (*loss == "cross_entropy")
                cfg.tcfg.loss = LossKind::cross_entropy;
            else
                throw ConfigError("loss must be squared_error or cross_entropy");
        }
        if (val_fraction)
            cfg.val_fraction = *val_fraction;
        if (combo_cap)
            cfg.combo_cap = *combo_cap;
        if (trials)
            cfg.random_trials = *trials;
        if (sizes)
            cfg.subband_sizes = *sizes;
        return cfg;
    }

    json snapshot(std::uint64_t seed) const {
        const PipelineConfig cfg = resolve(seed);
        json j;
        j["sensors"] = cfg.assemble.sensors;
        j["mask"] = cfg.assemble.mask.selected;
        j["intensity"] = cfg.assemble.mode == FeatureMode::intensity;
        j["raw"] = !cfg.assemble.normalized;
        j["norm_scope"] =
            cfg.assemble.scope == NormScope::per_sample ? "per_sample" : "per_sensor";
        j["model_type"] = cfg.model == ModelKind::network ? "network" : "knn";
        j["k"] = cfg.k;
        j["batch_size"] = cfg.tcfg.batch_size;
        j["learning_rate"] = cfg.tcfg.learning_rate;
        j["max_epochs"] = cfg.tcfg.max_epochs;
        j["patience"] = cfg.tcfg.patience;
        j["dropout"] = cfg.tcfg.dropout;
        j["hidden"] = cfg.tcfg.hidden;
        j["layer_order"] = cfg.tcfg.layer_order == LayerOrder::relu_then_bn ? "relu_then_bn"
                                                                            : "bn_then_relu";
        j["loss"] =
            cfg.tcfg.loss == LossKind::squared_error ? "squared_error" : "cross_entropy";
        j["val_fraction"] = cfg.val_fraction;
        j["combo_cap"] = cfg.combo_cap;
        j["trials"] = cfg.random_trials;
        j["sizes"] = cfg.subband_sizes;
        j["seed"] = seed;
        return j;
    }
};

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed) {
    if (!seed)
        throw CLI::RequiredError("--seed");
    return *seed;
}

int cmd_simulate(const CLI::App& cmd, const json& cfg, std::optional<std::string> scene_path,
                 std::optional<int> samples, std::optional<int> days,
                 std::optional<std::string> condition, std::optional<double> noise_accuracy,
                 std::optional<double> noise_floor, std::optional<std::uint64_t> seed,
                 std::optional<std::string> out) {
    merge(cmd, "--scene", cfg, "scene", scene_path);
    merge(cmd, "--samples", cfg, "samples", samples);
    merge(cmd, "--days", cfg, "days", days);
    merge(cmd, "--condition", cfg, "condition", condition);
    merge(cmd, "--noise-accuracy", cfg, "noise_accuracy", noise_accuracy);
    merge(cmd, "--noise-floor", cfg, "noise_floor", noise_floor);
    merge(cmd, "--seed", cfg, "seed", seed);
    merge(cmd, "--out", cfg, "out", out);

    if (!scene_path)
        throw CLI::RequiredError("--scene");
    if (!out)
        throw CLI::RequiredError("--out");
    const std::uint64_t seed_value = require_seed(seed);

    const Scene scene = read_scene(*scene_path);
    NoiseModel noise;
    if (noise_accuracy)
        noise.relative_accuracy = *noise_accuracy;
    if (noise_floor)
        noise.precision_floor = *noise_floor;

    const int n_days = days.value_or(1);
    if (n_days < 1)
        throw ConfigError("--days must be >= 1");
    std::vector<Fingerprint> all;
    for (int day = 1; day <= n_days; ++day) {
        SessionTags tags{day, condition.value_or("default")};
        const std::uint64_t day_seed = RngStream(seed_value).fork("day").fork(
            static_cast<std::uint64_t>(day)).seed();
        std::vector<Fingerprint> fps = generate_dataset(scene, samples.value_or(30), noise,
                                                        day_seed, tags);
        all.insert(all.end(), fps.begin(), fps.end());
    }
    Dataset dataset(scene.layout, std::move(all));
    write_log(dataset, *out);

    json snapshot{{"command", "simulate"},
                  {"scene", *scene_path},
                  {"samples", samples.value_or(30)},
                  {"days", n_days},
                  {"condition", condition.value_or("default")},
                  {"noise_accuracy", noise.relative_accuracy},
                  {"noise_floor", noise.precision_floor},
                  {"seed", seed_value},
                  {"out", *out}};
    write_snapshot(*out, snapshot);
    std::cout << "wrote " << dataset.size() << " fingerprints (" << dataset.sensors().size()
              << " sensors, " << dataset.spots().size() << " spots) to " << *out << "\n";
    return 0;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"specfp: spectral-fingerprint indoor localization toolkit"};
    app.require_subcommand(1);

    std::string config_path;

    // ---- simulate ----
    CLI::App* sim = app.add_subcommand("simulate", "Generate a fingerprint CSV from a scene file");
    std::optional<std::string> sim_scene, sim_condition, sim_out;
    std::optional<int> sim_samples, sim_days;
    std::optional<double> sim_acc, sim_floor;
    std::optional<std::uint64_t> sim_seed;
    sim->add_option("--config", config_path, "JSON config file (flags override)");
    sim->add_option("--scene", sim_scene, "Scene description file");
    sim->add_option("--samples", sim_samples, "Samples per spot per day (default 30)");
    sim->add_option("--days", sim_days, "Number of simulated days (default 1)");
    sim->add_option("--condition", sim_condition, "Lighting-condition tag (default 'default')");
    sim->add_option("--noise-accuracy", sim_acc, "Relative accuracy bound (default 0.12)");
    sim->add_option("--noise-floor", sim_floor, "Quantization floor nW/cm^2 (default 28.6)");
    sim->add_option("--seed", sim_seed, "RNG seed (required)");
    sim->add_option("--out", sim_out, "Output CSV path");

    // ---- train ----
    CLI::App* tr = app.add_subcommand("train", "Train a localization model from a CSV log");
    std::optional<std::string> tr_data, tr_holdout, tr_out;
    std::optional<std::uint64_t> tr_seed;
    PipelineOptions tr_pipe;
    tr->add_option("--config", config_path, "JSON config file (flags override)");
    tr->add_option("--data", tr_data, "Fingerprint CSV log");
    tr->add_option("--holdout", tr_holdout, "Group excluded from training, e.g. day=3");
    tr->add_option("--seed", tr_seed, "RNG seed (required)");
    tr->add_option("--out", tr_out, "Checkpoint output path");
    tr_pipe.add_flags(tr);

    // ---- eval ----
    CLI::App* ev = app.add_subcommand("eval", "Evaluate a checkpoint against a CSV log");
    std::optional<std::string> ev_model, ev_data, ev_holdout, ev_out;
    ev->add_option("--config", config_path, "JSON config file (flags override)");
    ev->add_option("--model", ev_model, "Model checkpoint path");
    ev->add_option("--data", ev_data, "Fingerprint CSV log");
    ev->add_option("--holdout", ev_holdout,
                   "Evaluate only this group, e.g. day=3 (default: whole file)");
    ev->add_option("--out", ev_out, "Report stem; writes <stem>.json and <stem>.samples.csv");

    // ---- ablate ----
    CLI::App* ab = app.add_subcommand("ablate", "Sensor-count or sub-band ablation sweeps");
    std::optional<std::string> ab_data, ab_what, ab_policy, ab_holdout, ab_out;
    std::optional<std::uint64_t> ab_seed;
    PipelineOptions ab_pipe;
    ab->add_option("--config", config_path, "JSON config file (flags override)");
    ab->add_option("--data", ab_data, "Fingerprint CSV log");
    ab->add_option("--what", ab_what, "sensors|subbands");
    ab->add_option("--policy", ab_policy, "rgb|random (sub-band sweeps, default random)");
    ab->add_option("--holdout", ab_holdout, "Test split, e.g. day=3 (required)");
    ab->add_option("--seed", ab_seed, "RNG seed (required)");
    ab->add_option("--out", ab_out, "Report stem");
    ab_pipe.add_flags(ab);

    // ---- stress ----
    CLI::App* st = app.add_subcommand("stress",
                                      "Train on one lighting condition, test on another");
    std::optional<std::string> st_train, st_test, st_data, st_train_cond, st_test_cond, st_out;
    std::optional<std::uint64_t> st_seed;
    PipelineOptions st_pipe;
    st->add_option("--config", config_path, "JSON config file (flags override)");
    st->add_option("--train-data", st_train, "Training-condition CSV log");
    st->add_option("--test-data", st_test, "Test-condition CSV log");
    st->add_option("--data", st_data, "Single CSV holding both conditions");
    st->add_option("--train-condition", st_train_cond, "Condition tag for training (with --data)");
    st->add_option("--test-condition", st_test_cond, "Condition tag for testing (with --data)");
    st->add_option("--seed", st_seed, "RNG seed (required)");
    st->add_option("--out", st_out, "Report stem");
    st_pipe.add_flags(st);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help or the error message
        return code == 0 ? 0 : 1;
    }

    json cfg = json::object();
    if (!config_path.empty())
        cfg = load_config_file(config_path);

    if (sim->parsed())
        return cmd_simulate(*sim, cfg, sim_scene, sim_samples, sim_days, sim_condition, sim_acc,
                            sim_floor, sim_seed, sim_out);

    if (tr->parsed()) {
        merge(*tr, "--data", cfg, "data", tr_data);
        merge(*tr, "--holdout", cfg, "holdout", tr_holdout);
        merge(*tr, "--seed", cfg, "seed", tr_seed);
        merge(*tr, "--out", cfg, "out", tr_out);
        tr_pipe.merge_config(*tr, cfg);
        if (!tr_data)
            throw CLI::RequiredError("--data");
        if (!tr_out)
            throw CLI::RequiredError("--out");
        const std::uint64_t seed = require_seed(tr_seed);

        Dataset dataset = read_log(*tr_data);
        const Dataset* train_side = &dataset;
        std::optional<std::pair<Dataset, Dataset>> split;
        if (tr_holdout) {
            const HoldoutSpec spec = parse_holdout(*tr_holdout);
            split = split_leave_one_group_out(dataset, spec.key, spec.tag);
            train_side = &split->first;
        }

        const PipelineConfig pipeline = tr_pipe.resolve(seed);
        std::vector<EpochStats> history;
        const LocalizationModel model = fit_pipeline(*train_side, pipeline, &history);
        save_model(model, *tr_out);

        if (!history.empty()) {
            std::string hist = "epoch,train_loss,val_loss\n";
            for (const EpochStats& e : history)
                hist += std::to_string(e.epoch) + ',' + std::to_string(e.train_loss) + ',' +
                        std::to_string(e.val_loss) + '\n';
            write_text(*tr_out + ".history.csv", hist);
        }

        json snapshot = tr_pipe.snapshot(seed);
        snapshot["command"] = "train";
        snapshot["data"] = *tr_data;
        snapshot["holdout"] = tr_holdout.value_or("");
        snapshot["out"] = *tr_out;
        write_snapshot(*tr_out, snapshot);
        std::cout << "trained on " << train_side->size() << " fingerprints; checkpoint at "
                  << *tr_out << "\n";
        return 0;
    }

    if (ev->parsed()) {
        merge(*ev, "--model", cfg, "model", ev_model);
        merge(*ev, "--data", cfg, "data", ev_data);
        merge(*ev, "--holdout", cfg, "holdout", ev_holdout);
        merge(*ev, "--out", cfg, "out", ev_out);
        if (!ev_model)
            throw CLI::RequiredError("--model");
        if (!ev_data)
            throw CLI::RequiredError("--data");
        if (!ev_out)
            throw CLI::RequiredError("--out");

        const LocalizationModel model = load_model(*ev_model);
        Dataset dataset = read_log(*ev_data, model.layout);

        EvalReport report;
        report.experiment = "eval";
        std::string run_name = "all";
        if (ev_holdout) {
            const HoldoutSpec spec = parse_holdout(*ev_holdout);
            auto parts = split_leave_one_group_out(dataset, spec.key, spec.tag);
            report.runs[*ev_holdout] = evaluate_model(model, parts.second);
            run_name = *ev_holdout;
        } else {
            report.runs[run_name] = evaluate_model(model, dataset);
        }
        json snapshot{{"command", "eval"},
                      {"model", *ev_model},
                      {"data", *ev_data},
                      {"holdout", ev_holdout.value_or("")},
                      {"out", *ev_out}};
        report.config_json = snapshot.dump();
        write_report(report, *ev_out);
        write_snapshot(*ev_out, snapshot);
        const SummaryStats& s = report.runs.at(run_name).summary;
        std::cout << "evaluated " << report.runs.at(run_name).samples.size()
                  << " fingerprints: median " << s.median << " m, p75 " << s.p75 << " m, p90 "
                  << s.p90 << " m\n";
        return 0;
    }

    if (ab->parsed()) {
        merge(*ab, "--data", cfg, "data", ab_data);
        merge(*ab, "--what", cfg, "what", ab_what);
        merge(*ab, "--policy", cfg, "policy", ab_policy);
        merge(*ab, "--holdout", cfg, "holdout", ab_holdout);
        merge(*ab, "--seed", cfg, "seed", ab_seed);
        merge(*ab, "--out", cfg, "out", ab_out);
        ab_pipe.merge_config(*ab, cfg);
        if (!ab_data)
            throw CLI::RequiredError("--data");
        if (!ab_what)
            throw CLI::RequiredError("--what");
        if (!ab_holdout)
            throw CLI::RequiredError("--holdout");
        if (!ab_out)
            throw CLI::RequiredError("--out");
        const std::uint64_t seed = require_seed(ab_seed);

        Dataset dataset = read_log(*ab_data);
        const HoldoutSpec spec = parse_holdout(*ab_holdout);
        const PipelineConfig pipeline = ab_pipe.resolve(seed);

        EvalReport report;
        if (*ab_what == "sensors") {
            report = ablate_sensor_count(dataset, pipeline, spec.key, spec.tag);
        } else if (*ab_what == "subbands") {
            SubBandPolicy policy = SubBandPolicy::random;
            if (ab_policy) {
                if (*ab_policy == "rgb")
                    policy = SubBandPolicy::rgb;
                else if (*ab_policy != "random")
                    throw ConfigError("policy must be rgb or random, got '" + *ab_policy + "'");
            }
            report = ablate_subbands(dataset, policy, pipeline, spec.key, spec.tag);
        } else {
            throw ConfigError("--what must be sensors or subbands, got '" + *ab_what + "'");
        }

        json snapshot = ab_pipe.snapshot(seed);
        snapshot["command"] = "ablate";
        snapshot["data"] = *ab_data;
        snapshot["what"] = *ab_what;
        snapshot["policy"] = ab_policy.value_or("random");
        snapshot["holdout"] = *ab_holdout;
        snapshot["out"] = *ab_out;
        write_report(report, *ab_out);
        write_snapshot(*ab_out, snapshot);
        std::cout << "ablation curve with " << report.curve.size() << " sizes written to "
                  << *ab_out << ".curve.csv\n";
        return 0;
    }

    if (st->parsed()) {
        merge(*st, "--train-data", cfg, "train_data", st_train);
        merge(*st, "--test-data", cfg, "test_data", st_test);
        merge(*st, "--data", cfg, "data", st_data);
        merge(*st, "--train-condition", cfg, "train_condition", st_train_cond);
        merge(*st, "--test-condition", cfg, "test_condition", st_test_cond);
        merge(*st, "--seed", cfg, "seed", st_seed);
        merge(*st, "--out", cfg, "out", st_out);
        st_pipe.merge_config(*st, cfg);
        if (!st_out)
            throw CLI::RequiredError("--out");
        const std::uint64_t seed = require_seed(st_seed);

        std::optional<Dataset> train_ds, test_ds;
        if (st_data) {
            if (!st_train_cond || !st_test_cond)
                throw ConfigError("--data needs --train-condition and --test-condition");
            Dataset d = read_log(*st_data);
            train_ds =
                std::move(split_leave_one_group_out(d, GroupKey::condition, *st_train_cond).second);
            test_ds =
                std::move(split_leave_one_group_out(d, GroupKey::condition, *st_test_cond).second);
        } else {
            if (!st_train || !st_test)
                throw ConfigError("stress needs either --data or both --train-data/--test-data");
            train_ds = read_log(*st_train);
            test_ds = read_log(*st_test, train_ds->layout());
        }

        const PipelineConfig pipeline = st_pipe.resolve(seed);
        EvalReport report = stress_test(*train_ds, *test_ds, pipeline);

        json snapshot = st_pipe.snapshot(seed);
        snapshot["command"] = "stress";
        snapshot["train_data"] = st_train.value_or(st_data.value_or(""));
        snapshot["test_data"] = st_test.value_or(st_data.value_or(""));
        snapshot["train_condition"] = st_train_cond.value_or("");
        snapshot["test_condition"] = st_test_cond.value_or("");
        snapshot["out"] = *st_out;
        write_report(report, *st_out);
        write_snapshot(*st_out, snapshot);
        const SummaryStats& raw = report.runs.at("raw").summary;
        const SummaryStats& norm = report.runs.at("normalized").summary;
        std::cout << "stress medians: raw " << raw.median << " m, normalized " << norm.median
                  << " m\n";
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Required flags resolved after config merging land here.
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const specfp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
