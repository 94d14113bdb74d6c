// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits non-zero if any required criterion fails. Criterion 8
// needs an external dataset and is skipped (not failed) when absent.

#include "sideflow/capture.hpp"
#include "sideflow/dnn.hpp"
#include "sideflow/eval.hpp"
#include "sideflow/features.hpp"
#include "sideflow/openset.hpp"
#include "sideflow/segment.hpp"
#include "sideflow/synth.hpp"
#include "sideflow/util.hpp"

#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace sideflow;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report(int number, const char* name, bool pass, const std::string& detail,
            double seconds) {
    if (!pass) ++g_failures;
    std::printf("[%s] criterion %d: %s (%s, %.1fs)\n", pass ? "PASS" : "FAIL", number, name,
                detail.c_str(), seconds);
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// --------------------------------------------------------------------------

void criterion_1_gradients() {
    Timer timer;
    ModelConfig config;
    config.hidden_dims = {8, 8};
    config.output_dim = 5;
    const auto result = testsupport::finite_difference_check(config, 987654321, 150);
    const double elapsed = timer.seconds();
    const bool pass = result.coords_checked >= 100 && result.max_rel_err < 1e-4 && elapsed < 10.0;
    report(1, "gradients match central finite differences", pass,
           "max rel err " + fmt(result.max_rel_err) + " over " +
               std::to_string(result.coords_checked) + " coordinates",
           elapsed);
}

void criterion_2_feature_oracle() {
    Timer timer;
    Rng rng(424242);
    double worst = 0.0;
    bool finite_ok = true;
    std::size_t empty_dir = 0, single = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
        const FlowSegment seg = testsupport::random_segment(rng, i);
        std::size_t up = 0;
        for (const CaptureRecord& rec : seg.frames) {
            if (rec.dir == Direction::uplink) ++up;
        }
        if (up == 0 || up == seg.frames.size()) ++empty_dir;
        if (seg.frames.size() == 1) ++single;

        const FeatureVector fv = featurize(seg);
        const auto expected = testsupport::oracle_featurize(seg);
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            if (!std::isfinite(fv.values[j])) finite_ok = false;
            worst = std::max(worst, std::fabs(fv.values[j] - expected[j]));
        }
    }
    const double elapsed = timer.seconds();
    const bool pass = worst <= 1e-9 && finite_ok && empty_dir > 0 && single > 0 && elapsed < 30.0;
    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "max abs diff %.2e, %zu one-direction and %zu single-frame segments", worst,
                  empty_dir, single);
    report(2, "featurize equals the independent formula oracle", pass, detail, elapsed);
}

void criterion_3_scaler() {
    Timer timer;
    Rng rng(31337);
    std::vector<FeatureVector> rows(500);
    for (FeatureVector& fv : rows) {
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            fv.values[j] = rng.normal() * (1.0 + static_cast<double>(j % 7)) +
                           static_cast<double>(j);
        }
        fv.values[10] = 0.1; // constant columns, one of them non-zero
        fv.values[20] = 0.0;
    }
    const Scaler scaler = fit_scaler(rows);
    std::vector<FeatureVector> scaled;
    for (const FeatureVector& fv : rows) scaled.push_back(apply_scaler(scaler, fv));

    bool pass = true;
    double worst_mean = 0.0, worst_std = 0.0;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        if (j == 10 || j == 20) {
            for (const FeatureVector& fv : scaled) {
                if (fv.values[j] != 0.0) pass = false;
            }
            continue;
        }
        double mean = 0.0;
        for (const FeatureVector& fv : scaled) mean += fv.values[j];
        mean /= static_cast<double>(scaled.size());
        double ss = 0.0;
        for (const FeatureVector& fv : scaled) {
            ss += (fv.values[j] - mean) * (fv.values[j] - mean);
        }
        const double std_pop = std::sqrt(ss / static_cast<double>(scaled.size()));
        worst_mean = std::max(worst_mean, std::fabs(mean));
        worst_std = std::max(worst_std, std::fabs(std_pop - 1.0));
    }
    if (worst_mean >= 1e-9 || worst_std >= 1e-9) pass = false;
    char detail[128];
    std::snprintf(detail, sizeof(detail), "max |mean| %.2e, max |std-1| %.2e", worst_mean,
                  worst_std);
    report(3, "scaler standardizes and zeroes constant columns", pass, detail, timer.seconds());
}

void criterion_4_threshold_monotonicity() {
    Timer timer;
    Rng rng(777);
    const std::vector<ActivityLabel> labels = {{"a", "x"}, {"b", "y"}, {"c", "z"}};
    std::vector<std::vector<double>> prob_rows;
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> p(3);
        double total = 0.0;
        for (double& v : p) {
            v = std::exp(rng.normal() * 2.0);
            total += v;
        }
        for (double& v : p) v /= total;
        prob_rows.push_back(std::move(p));
    }
    bool pass = true;
    std::size_t prev = 0;
    for (double tau : uniform_tau_grid(101)) {
        std::size_t rejected = 0;
        for (const auto& p : prob_rows) {
            if (!classify(p, tau, labels).verdict) ++rejected;
        }
        if (rejected < prev) pass = false;
        if (tau == 0.0 && rejected != 0) pass = false;
        prev = rejected;
    }
    report(4, "rejection count is monotone over the tau grid", pass,
           std::to_string(prob_rows.size()) + " instances, 101 thresholds", timer.seconds());
}

void criterion_5_segmentation_partition() {
    Timer timer;
    ActivityProfile profile;
    profile.label = {"segapp", "burst_mix"};
    profile.uplink_len = Distribution::make_lognormal(5.2, 0.4, 40.0, 1500.0);
    profile.downlink_len = Distribution::make_lognormal(6.4, 0.3, 40.0, 1500.0);
    profile.uplink_iat = Distribution::make_exponential(40.0);
    profile.downlink_iat = Distribution::make_exponential(80.0);
    profile.uplink_fraction = 40.0 / 120.0;
    const auto records = generate_capture(profile, 60.0, 5150);
    const auto [kept, meta] = filter_frames(records);

    bool pass = !kept.empty();
    std::size_t prev_segments = 0;
    std::string counts;
    for (double w : {0.5, 0.2, 0.05, 0.02}) {
        const auto segments = segment_by_window(kept, w);
        std::size_t total = 0;
        for (const FlowSegment& seg : segments) {
            total += seg.frames.size();
            if (seg.frames.empty()) pass = false;
        }
        if (total != kept.size()) pass = false;
        if (prev_segments != 0 && segments.size() < prev_segments) pass = false;
        prev_segments = segments.size();
        counts += (counts.empty() ? "" : "/") + std::to_string(segments.size());
    }
    report(5, "windowing partitions the stream at every window size", pass,
           std::to_string(kept.size()) + " frames -> " + counts + " segments", timer.seconds());
}

struct FixtureData {
    std::vector<FeatureVector> trained;
    std::map<std::string, std::vector<FeatureVector>> held_out;
    std::vector<FeatureVector> calibration;
    std::size_t total_segments = 0;
};

FixtureData build_fixture(double duration, double window_s, std::uint64_t seed) {
    FixtureData data;
    const auto profiles = demo8_profiles();
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const ActivityProfile& profile = profiles[i];
        const auto records = generate_capture(profile, duration, derive_seed(seed, i));
        const auto [kept, meta] = filter_frames(records);
        for (const FlowSegment& seg : segment_by_window(kept, window_s)) {
            FeatureVector fv = featurize(seg);
            ++data.total_segments;
            const std::string& app = profile.label.app;
            if (app == "cliphub" || app == "gamerush") {
                data.held_out[app].push_back(std::move(fv));
            } else {
                data.trained.push_back(std::move(fv));
            }
        }
    }
    const auto noise = demo8_noise_profiles();
    for (std::size_t i = 0; i < noise.size(); ++i) {
        const auto records = generate_capture(noise[i], duration / 2.0, derive_seed(seed, 1000 + i));
        const auto [kept, meta] = filter_frames(records);
        for (const FlowSegment& seg : segment_by_window(kept, window_s)) {
            data.calibration.push_back(featurize(seg));
        }
    }
    return data;
}

ModelConfig fixture_config() {
    ModelConfig config;
    config.hidden_dims = {128, 64};
    config.dropout_rate = 0.3;
    config.learning_rate = 2e-3;
    config.batch_size = 512;
    config.epochs = 30;
    config.seed = 7;
    return config;
}

void criterion_6_end_to_end() {
    Timer timer;
    const FixtureData data = build_fixture(280.0, 0.5, 20250808);

    const auto [artifact, train_report] = train(data.trained, fixture_config());
    const double val_acc = train_report.epochs.back().validation_accuracy;

    // recommended tau from the validation split against designated noise;
    // the held-out apps stay out of calibration
    const auto [train_idx, val_idx] = stratified_split_indices(data.trained, fixture_config().seed);
    std::vector<FeatureVector> val_rows;
    for (std::size_t i : val_idx) val_rows.push_back(data.trained[i]);
    const SweepReport sweep =
        sweep_threshold(artifact, val_rows, data.calibration, uniform_tau_grid(101));
    const double tau = sweep.recommended_tau;

    double rejection_sum = 0.0;
    bool rows_ok = true;
    std::string per_app;
    for (const auto& [app, rows] : data.held_out) {
        const std::vector<Prediction> preds = predict_all(artifact, rows, tau);
        const double rate = accuracy_unknown(preds);
        rejection_sum += rate;
        const MisclassRow row = misclass_row(preds, artifact.label_map);
        if (!row.empty()) {
            double total = 0.0;
            for (const auto& [col, pct] : row.pct) total += pct;
            if (std::fabs(total - 100.0) > 1.0) rows_ok = false;
        }
        per_app += " " + app + " " + fmt(rate);
    }
    const double mean_rejection = rejection_sum / static_cast<double>(data.held_out.size());
    const double elapsed = timer.seconds();

    const bool pass = data.total_segments >= 15000 && val_acc >= 0.90 &&
                      mean_rejection >= 0.70 && rows_ok && elapsed < 300.0;
    report(6, "end-to-end synthetic fixture, 6 trained / 2 held out", pass,
           std::to_string(data.total_segments) + " segments, val acc " + fmt(val_acc) +
               ", tau " + fmt(tau) + ", mean rejection " + fmt(mean_rejection) + " (" + per_app +
               " )",
           elapsed);
}

void criterion_7_determinism() {
    Timer timer;
    testsupport::TempDir dir("acceptance7");

    // small three-app feature set via the real pipeline
    std::vector<FeatureVector> rows;
    std::size_t index = 0;
    for (const ActivityProfile& profile : demo8_profiles()) {
        const std::string& app = profile.label.app;
        if (app != "chatly" && app != "mailpost" && app != "voxtel") continue;
        const auto records = generate_capture(profile, 40.0, derive_seed(55, index++));
        const auto [kept, meta] = filter_frames(records);
        for (const FlowSegment& seg : segment_by_window(kept, 0.5)) {
            rows.push_back(featurize(seg));
        }
    }
    {
        std::ostringstream body;
        write_feature_csv(rows, body);
        std::ofstream(dir.str("features.csv")) << body.str();
    }

    bool pass = true;
    const std::string base = "train " + dir.str("features.csv") + " --seed 7 --epochs 3 ";
    if (testsupport::run_cli(base + "-o " + dir.str("m1.json")) != 0) pass = false;
    if (testsupport::run_cli(base + "-o " + dir.str("m2.json")) != 0) pass = false;
    const std::string m1 = testsupport::slurp(dir.str("m1.json"));
    if (m1.empty() || m1 != testsupport::slurp(dir.str("m2.json"))) pass = false;

    const std::string loao_base =
        "loao " + dir.str("features.csv") + " --seed 7 --epochs 3 ";
    if (testsupport::run_cli(loao_base + "-o " + dir.str("r1")) != 0) pass = false;
    if (testsupport::run_cli(loao_base + "-o " + dir.str("r2")) != 0) pass = false;
    const std::string r1 = testsupport::slurp(dir.path() / "r1" / "loao_report.csv");
    if (r1.empty() || r1 != testsupport::slurp(dir.path() / "r2" / "loao_report.csv")) pass = false;
    if (testsupport::slurp(dir.path() / "r1" / "loao_misclass.csv") !=
        testsupport::slurp(dir.path() / "r2" / "loao_misclass.csv")) {
        pass = false;
    }
    report(7, "train and loao are byte-identical for a fixed seed", pass,
           std::to_string(rows.size()) + " feature rows through the CLI", timer.seconds());
}

void criterion_8_dataset_reference() {
    Timer timer;
    const char* dataset = std::getenv("SIDEFLOW_DATASET");
    if (dataset == nullptr || !fs::exists(fs::path(dataset) / "features_w0.5.csv")) {
        std::printf("[SKIP] criterion 8: reference dataset check (set SIDEFLOW_DATASET to a "
                    "directory containing features_w0.5.csv)\n");
        return;
    }
    try {
        const auto rows = read_feature_csv_file((fs::path(dataset) / "features_w0.5.csv").string());
        ModelConfig config; // stock architecture
        config.seed = 7;
        const auto [artifact, train_report] = train(rows, config);
        const double val_acc = train_report.epochs.back().validation_accuracy;
        const bool within = std::fabs(val_acc - 0.93) <= 0.05;
        // informational: a miss here does not fail the suite
        std::printf("[%s] criterion 8 (optional): reference validation accuracy %.4f vs 0.93 "
                    "+/- 0.05 (%.1fs)\n",
                    within ? "PASS" : "WARN", val_acc, timer.seconds());
    } catch (const std::exception& e) {
        std::printf("[WARN] criterion 8 (optional): %s\n", e.what());
    }
}

} // namespace

int main() {
    criterion_1_gradients();
    criterion_2_feature_oracle();
    criterion_3_scaler();
    criterion_4_threshold_monotonicity();
    criterion_5_segmentation_partition();
    criterion_6_end_to_end();
    criterion_7_determinism();
    criterion_8_dataset_reference();

    if (g_failures > 0) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all required criteria passed\n");
    return 0;
}
