#include "sideflow/capture.hpp"
#include "sideflow/dnn.hpp"
#include "sideflow/errors.hpp"
#include "sideflow/eval.hpp"
#include "sideflow/features.hpp"
#include "sideflow/openset.hpp"
#include "sideflow/segment.hpp"
#include "sideflow/synth.hpp"
#include "sideflow/util.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sideflow;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// Reproducibility sidecar written next to every output.
struct RunManifest {
    std::string subcommand;
    json parameters = json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    double duration_s = 0.0;

    void write(const fs::path& path) const {
        json doc{{"tool", "sideflow"},     {"version", kToolVersion},
                 {"subcommand", subcommand}, {"parameters", parameters},
                 {"inputs", inputs},         {"outputs", outputs},
                 {"seed", seed},             {"duration_s", duration_s}};
        write_file_atomic(path, doc.dump(2) + "\n");
    }
};

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

// Splits one capture's records into per-label streams, preserving frame
// order and first-appearance group order. Unlabeled records form their
// own stream.
std::vector<std::vector<CaptureRecord>> group_by_label(const std::vector<CaptureRecord>& records) {
    std::vector<std::vector<CaptureRecord>> groups;
    std::map<std::optional<ActivityLabel>, std::size_t> index;
    for (const CaptureRecord& rec : records) {
        auto [it, inserted] = index.emplace(rec.label, groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].push_back(rec);
    }
    return groups;
}

std::vector<FeatureVector> featurize_log_file(const std::string& path, double window_s,
                                              bool require_label) {
    std::vector<FeatureVector> rows;
    const std::vector<CaptureRecord> records = parse_frame_log_file(path);
    const auto [kept, meta] = filter_frames(records);
    for (const std::vector<CaptureRecord>& stream : group_by_label(kept)) {
        if (require_label && !stream.front().label) {
            throw input_error(path + ": records without app/activity labels cannot be featurized");
        }
        for (const FlowSegment& seg : segment_by_window(stream, window_s)) {
            rows.push_back(featurize(seg));
        }
    }
    return rows;
}

int cmd_synth(const std::string& fixture, const std::string& config_path, double duration,
              std::uint64_t seed, const std::string& out_dir) {
    Stopwatch clock;
    std::vector<ActivityProfile> profiles;
    if (!fixture.empty()) {
        if (fixture == "demo8") profiles = demo8_profiles();
        else if (fixture == "demo8-noise") profiles = demo8_noise_profiles();
        else throw input_error("unknown fixture \"" + fixture + "\" (try demo8 or demo8-noise)");
    } else if (!config_path.empty()) {
        profiles = load_profiles(config_path);
    } else {
        throw input_error("synth needs either --fixture or --config");
    }

    fs::create_directories(out_dir);
    RunManifest manifest;
    manifest.subcommand = "synth";
    manifest.parameters = {{"fixture", fixture}, {"config", config_path}, {"duration", duration}};
    manifest.seed = seed;
    if (!config_path.empty()) manifest.inputs.push_back(config_path);

    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const ActivityProfile& profile = profiles[i];
        const std::vector<CaptureRecord> records =
            generate_capture(profile, duration, derive_seed(seed, i));
        std::ostringstream body;
        write_frame_log(records, body);
        const fs::path out =
            fs::path(out_dir) / (profile.label.app + "__" + profile.label.activity + ".jsonl");
        write_file_atomic(out, body.str());
        manifest.outputs.push_back(out.string());
        std::cout << out.string() << ": " << records.size() << " frames\n";
    }
    manifest.duration_s = clock.seconds();
    manifest.write(fs::path(out_dir) / "manifest.json");
    return 0;
}

int cmd_featurize(const std::vector<std::string>& inputs, double window_s,
                  const std::string& out_path) {
    Stopwatch clock;
    std::vector<FeatureVector> rows;
    for (const std::string& path : inputs) {
        std::vector<FeatureVector> part = featurize_log_file(path, window_s, true);
        rows.insert(rows.end(), std::make_move_iterator(part.begin()),
                    std::make_move_iterator(part.end()));
    }
    std::ostringstream body;
    write_feature_csv(rows, body);
    write_file_atomic(out_path, body.str());
    std::cout << out_path << ": " << rows.size() << " segments\n";

    RunManifest manifest;
    manifest.subcommand = "featurize";
    manifest.parameters = {{"window_s", window_s}};
    manifest.inputs = inputs;
    manifest.outputs = {out_path};
    manifest.duration_s = clock.seconds();
    manifest.write(out_path + ".manifest.json");
    return 0;
}

int cmd_train(const std::string& features_path, const std::string& config_path,
              bool seed_set, std::uint64_t seed, bool epochs_set, std::uint64_t epochs,
              double threshold, const std::string& out_path, const std::string& report_path) {
    Stopwatch clock;
    ModelConfig config;
    if (!config_path.empty()) config = model_config_from_json(read_file(config_path));
    if (seed_set) config.seed = seed;
    if (epochs_set) config.epochs = epochs;

    const std::vector<FeatureVector> rows = read_feature_csv_file(features_path);
    auto [artifact, report] = train(rows, config, threshold);
    save_artifact(artifact, out_path);
    const std::string resolved_report =
        report_path.empty() ? out_path + ".report.csv" : report_path;
    write_file_atomic(resolved_report, report.to_csv());

    const EpochStats& last = report.epochs.back();
    std::cout << out_path << ": " << artifact.label_map.size() << " classes, train acc "
              << last.train_accuracy << ", val acc " << last.validation_accuracy << "\n";

    RunManifest manifest;
    manifest.subcommand = "train";
    manifest.parameters = {{"config", json::parse(model_config_to_json(artifact.config))},
                           {"threshold", threshold}};
    manifest.inputs = {features_path};
    if (!config_path.empty()) manifest.inputs.push_back(config_path);
    manifest.outputs = {out_path, resolved_report};
    manifest.seed = artifact.config.seed;
    manifest.duration_s = clock.seconds();
    manifest.write(out_path + ".manifest.json");
    return 0;
}

int cmd_classify(const std::vector<std::string>& inputs, const std::string& model_path,
                 double window_s, double tau, const std::string& out_path) {
    Stopwatch clock;
    const ModelArtifact artifact = load_artifact(model_path);
    const double threshold = tau < 0.0 ? artifact.threshold : tau;

    std::string body = "app,activity,window_index,pred_app,pred_activity,p_max,verdict\n";
    std::size_t n_rows = 0;
    for (const std::string& path : inputs) {
        const std::vector<FeatureVector> rows = featurize_log_file(path, window_s, false);
        const std::vector<Prediction> preds = predict_all(artifact, rows, threshold);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const FeatureVector& fv = rows[i];
            const Prediction& p = preds[i];
            body += fv.label ? fv.label->app + "," + fv.label->activity : ",";
            body += "," + std::to_string(fv.window_index) + ",";
            body += p.verdict ? p.verdict->app + "," + p.verdict->activity : ",";
            body += "," + format_double(p.p_max) + ",";
            body += p.verdict ? "known" : "unknown";
            body += "\n";
            ++n_rows;
        }
    }
    write_file_atomic(out_path, body);
    std::cout << out_path << ": " << n_rows << " predictions at threshold " << threshold << "\n";

    RunManifest manifest;
    manifest.subcommand = "classify";
    manifest.parameters = {{"model", model_path}, {"window_s", window_s}, {"threshold", threshold}};
    manifest.inputs = inputs;
    manifest.inputs.push_back(model_path);
    manifest.outputs = {out_path};
    manifest.duration_s = clock.seconds();
    manifest.write(out_path + ".manifest.json");
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& known_path,
                 const std::string& unknown_path, double tau, std::size_t bins,
                 std::size_t grid_points, const std::string& out_dir) {
    Stopwatch clock;
    const ModelArtifact artifact = load_artifact(model_path);
    const double threshold = tau < 0.0 ? artifact.threshold : tau;

    const std::vector<FeatureVector> known = read_feature_csv_file(known_path);
    std::vector<FeatureVector> unknown;
    if (!unknown_path.empty()) unknown = read_feature_csv_file(unknown_path);

    std::vector<ActivityLabel> truth;
    for (const FeatureVector& fv : known) truth.push_back(*fv.label);

    const std::vector<Prediction> known_preds = predict_all(artifact, known, threshold);
    const std::vector<Prediction> unknown_preds = predict_all(artifact, unknown, threshold);

    const EvalReport report =
        evaluate_predictions(known_preds, truth, unknown_preds, artifact.label_map);
    const Histogram histogram = confidence_histogram(known_preds, unknown_preds, bins);

    fs::create_directories(out_dir);
    RunManifest manifest;
    manifest.subcommand = "evaluate";
    manifest.parameters = {{"model", model_path}, {"threshold", threshold}, {"bins", bins},
                           {"grid_points", grid_points}};
    manifest.inputs = {model_path, known_path};
    if (!unknown_path.empty()) manifest.inputs.push_back(unknown_path);

    auto emit = [&](const char* name, const std::string& content) {
        const fs::path path = fs::path(out_dir) / name;
        write_file_atomic(path, content);
        manifest.outputs.push_back(path.string());
    };
    emit("eval_report.csv", report.to_csv());
    emit("per_class.csv", report.per_class_csv());
    emit("histogram.csv", histogram.to_csv());

    std::string text = "threshold: " + format_double(threshold) + "\n" + report.to_text();
    if (!unknown.empty()) {
        const SweepReport sweep =
            sweep_threshold(artifact, known, unknown, uniform_tau_grid(grid_points));
        emit("sweep.csv", sweep.to_csv());
        text += "recommended threshold: " + format_double(sweep.recommended_tau) + "\n";
    }
    emit("report.txt", text);
    std::cout << text;

    manifest.duration_s = clock.seconds();
    manifest.write(fs::path(out_dir) / "manifest.json");
    return 0;
}

int cmd_loao(const std::string& features_path, const std::string& config_path, bool seed_set,
             std::uint64_t seed, bool epochs_set, std::uint64_t epochs, double threshold,
             bool sweep, const std::string& calibration_path, const std::string& out_dir) {
    Stopwatch clock;
    ModelConfig config;
    if (!config_path.empty()) config = model_config_from_json(read_file(config_path));
    if (seed_set) config.seed = seed;
    if (epochs_set) config.epochs = epochs;

    TauPolicy policy;
    policy.fixed_tau = threshold;
    if (sweep) {
        policy.kind = TauPolicy::Kind::sweep;
        if (calibration_path.empty()) {
            throw input_error("--sweep needs --calibration-unknown with designated noise features");
        }
        policy.calibration_unknown = read_feature_csv_file(calibration_path);
    }

    const std::vector<FeatureVector> rows = read_feature_csv_file(features_path);
    const LoaoReport report = leave_one_app_out(rows, config, policy);

    fs::create_directories(out_dir);
    RunManifest manifest;
    manifest.subcommand = "loao";
    manifest.parameters = {{"config", json::parse(model_config_to_json(config))},
                           {"threshold", threshold},
                           {"sweep", sweep}};
    manifest.inputs = {features_path};
    if (!config_path.empty()) manifest.inputs.push_back(config_path);
    if (!calibration_path.empty()) manifest.inputs.push_back(calibration_path);
    manifest.seed = config.seed;

    auto emit = [&](const char* name, const std::string& content) {
        const fs::path path = fs::path(out_dir) / name;
        write_file_atomic(path, content);
        manifest.outputs.push_back(path.string());
    };
    emit("loao_report.csv", report.report_csv());
    emit("loao_misclass.csv", report.misclass_csv());
    emit("loao.txt", report.to_text());
    std::cout << report.to_text();

    manifest.duration_s = clock.seconds();
    manifest.write(fs::path(out_dir) / "manifest.json");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sideflow: in-app activity classification from Wi-Fi side-channel metadata"};
    app.set_version_flag("--version", std::string("sideflow ") + kToolVersion);
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate labeled synthetic frame logs");
    std::string synth_fixture, synth_config, synth_out;
    double synth_duration = 60.0;
    std::uint64_t synth_seed = 0;
    synth->add_option("--fixture", synth_fixture, "built-in profile set (demo8, demo8-noise)");
    synth->add_option("--config", synth_config, "activity profile JSON file");
    synth->add_option("--duration", synth_duration, "seconds of traffic per activity");
    synth->add_option("--seed", synth_seed, "master random seed");
    synth->add_option("-o,--output", synth_out, "output directory")->required();

    // featurize
    auto* featurize = app.add_subcommand("featurize", "frame logs -> 48-feature CSV");
    std::vector<std::string> feat_inputs;
    double feat_window = 0.0;
    std::string feat_out;
    featurize->add_option("inputs", feat_inputs, "frame log files")->required();
    featurize->add_option("--window-s", feat_window, "segmentation window in seconds")->required();
    featurize->add_option("-o,--output", feat_out, "output CSV path")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "feature CSV -> model artifact");
    std::string train_features, train_config, train_out, train_report;
    std::uint64_t train_seed = 0, train_epochs = 0;
    double train_threshold = kDefaultRejectionThreshold;
    train_cmd->add_option("features", train_features, "feature CSV")->required();
    train_cmd->add_option("--config", train_config, "model config JSON file");
    auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "random seed");
    auto* train_epochs_opt = train_cmd->add_option("--epochs", train_epochs, "epoch count");
    train_cmd->add_option("--threshold", train_threshold, "rejection threshold stored in the artifact");
    train_cmd->add_option("-o,--output", train_out, "model artifact path")->required();
    train_cmd->add_option("--report", train_report,
                          "per-epoch metrics CSV path (default: <output>.report.csv)");

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "frame logs -> per-segment predictions");
    std::vector<std::string> cls_inputs;
    std::string cls_model, cls_out;
    double cls_window = 0.0, cls_threshold = -1.0;
    classify_cmd->add_option("inputs", cls_inputs, "frame log files")->required();
    classify_cmd->add_option("--model", cls_model, "model artifact")->required();
    classify_cmd->add_option("--window-s", cls_window, "segmentation window in seconds")->required();
    classify_cmd->add_option("--threshold", cls_threshold, "override the artifact threshold");
    classify_cmd->add_option("-o,--output", cls_out, "predictions CSV path")->required();

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "score known/unknown feature sets");
    std::string eval_model, eval_known, eval_unknown, eval_out;
    double eval_threshold = -1.0;
    std::size_t eval_bins = 20, eval_grid = 101;
    eval_cmd->add_option("--model", eval_model, "model artifact")->required();
    eval_cmd->add_option("--known", eval_known, "feature CSV of trained-class traffic")->required();
    eval_cmd->add_option("--unknown", eval_unknown, "feature CSV of never-trained traffic");
    eval_cmd->add_option("--threshold", eval_threshold, "override the artifact threshold");
    eval_cmd->add_option("--bins", eval_bins, "confidence histogram bins");
    eval_cmd->add_option("--grid-points", eval_grid, "threshold sweep grid size");
    eval_cmd->add_option("-o,--output", eval_out, "output directory")->required();

    // loao
    auto* loao_cmd = app.add_subcommand("loao", "leave-one-app-out noise detection protocol");
    std::string loao_features, loao_config, loao_calibration, loao_out;
    std::uint64_t loao_seed = 0, loao_epochs = 0;
    double loao_threshold = kDefaultRejectionThreshold;
    bool loao_sweep = false;
    loao_cmd->add_option("features", loao_features, "feature CSV of the full dataset")->required();
    loao_cmd->add_option("--config", loao_config, "model config JSON file");
    auto* loao_seed_opt = loao_cmd->add_option("--seed", loao_seed, "random seed");
    auto* loao_epochs_opt = loao_cmd->add_option("--epochs", loao_epochs, "epoch count");
    loao_cmd->add_option("--threshold", loao_threshold, "fixed rejection threshold");
    loao_cmd->add_flag("--sweep", loao_sweep, "pick tau per run by sweeping on validation + calibration noise");
    loao_cmd->add_option("--calibration-unknown", loao_calibration,
                         "feature CSV of designated noise for the sweep policy");
    loao_cmd->add_option("-o,--output", loao_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) {
            return cmd_synth(synth_fixture, synth_config, synth_duration, synth_seed, synth_out);
        }
        if (featurize->parsed()) {
            return cmd_featurize(feat_inputs, feat_window, feat_out);
        }
        if (train_cmd->parsed()) {
            return cmd_train(train_features, train_config, train_seed_opt->count() > 0, train_seed,
                             train_epochs_opt->count() > 0, train_epochs, train_threshold,
                             train_out, train_report);
        }
        if (classify_cmd->parsed()) {
            return cmd_classify(cls_inputs, cls_model, cls_window, cls_threshold, cls_out);
        }
        if (eval_cmd->parsed()) {
            return cmd_evaluate(eval_model, eval_known, eval_unknown, eval_threshold, eval_bins,
                                eval_grid, eval_out);
        }
        if (loao_cmd->parsed()) {
            return cmd_loao(loao_features, loao_config, loao_seed_opt->count() > 0, loao_seed,
                            loao_epochs_opt->count() > 0, loao_epochs, loao_threshold, loao_sweep,
                            loao_calibration, loao_out);
        }
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
