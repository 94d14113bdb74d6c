#include "sideflow/eval.hpp"
#include "sideflow/errors.hpp"
#include "sideflow/util.hpp"

#include <doctest.h>

#include <cmath>

using namespace sideflow;

namespace {

const std::vector<ActivityLabel> kLabels = {
    {"facebook", "post_photo"}, {"facebook", "scroll_feed"}, {"gmail", "send_mail"},
    {"skype", "video_call"}};

Prediction accepted_as(std::size_t index, double p = 0.99) {
    Prediction pred;
    pred.probabilities.assign(kLabels.size(), (1.0 - p) / (kLabels.size() - 1));
    pred.probabilities[index] = p;
    pred.p_max = p;
    pred.argmax_index = index;
    pred.verdict = kLabels[index];
    return pred;
}

Prediction rejected(std::size_t index = 0, double p = 0.40) {
    Prediction pred = accepted_as(index, p);
    pred.verdict.reset();
    return pred;
}

} // namespace

TEST_CASE("accuracy_known counts accepted-and-correct only") {
    std::vector<Prediction> preds;
    std::vector<ActivityLabel> truth;
    for (int i = 0; i < 8; ++i) {
        preds.push_back(accepted_as(0));
        truth.push_back(kLabels[0]);
    }
    preds.push_back(accepted_as(1));
    truth.push_back(kLabels[2]); // wrong label
    preds.push_back(rejected());
    truth.push_back(kLabels[0]); // rejected known instance
    CHECK(accuracy_known(preds, truth) == 0.8);

    std::vector<Prediction> perfect(5, accepted_as(2));
    std::vector<ActivityLabel> perfect_truth(5, kLabels[2]);
    CHECK(accuracy_known(perfect, perfect_truth) == 1.0);

    CHECK_THROWS_AS(accuracy_known(preds, perfect_truth), input_error);
}

TEST_CASE("accuracy_unknown is the rejected fraction") {
    std::vector<Prediction> preds;
    for (int i = 0; i < 62; ++i) preds.push_back(rejected());
    for (int i = 0; i < 38; ++i) preds.push_back(accepted_as(0));
    CHECK(accuracy_unknown(preds) == doctest::Approx(0.62).epsilon(1e-12));

    CHECK(accuracy_unknown(std::vector<Prediction>(4, rejected())) == 1.0);
    CHECK(accuracy_unknown(std::vector<Prediction>(4, accepted_as(1))) == 0.0);
    CHECK_THROWS_AS(accuracy_unknown({}), input_error);
}

TEST_CASE("accuracies agree with a recount oracle on random predictions") {
    Rng rng(71);
    std::vector<Prediction> preds;
    std::vector<ActivityLabel> truth;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t cls = rng.below(kLabels.size());
        if (rng.u01() < 0.3) preds.push_back(rejected(cls));
        else preds.push_back(accepted_as(rng.u01() < 0.7 ? cls : rng.below(kLabels.size())));
        truth.push_back(kLabels[cls]);
    }
    std::size_t correct = 0, unknown = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (!preds[i].verdict) ++unknown;
        else if (*preds[i].verdict == truth[i]) ++correct;
    }
    CHECK(accuracy_known(preds, truth) ==
          static_cast<double>(correct) / static_cast<double>(preds.size()));
    CHECK(accuracy_unknown(preds) ==
          static_cast<double>(unknown) / static_cast<double>(preds.size()));

    // permutation invariance: reverse the instance order
    std::vector<Prediction> rev_preds(preds.rbegin(), preds.rend());
    std::vector<ActivityLabel> rev_truth(truth.rbegin(), truth.rend());
    CHECK(accuracy_known(rev_preds, rev_truth) == accuracy_known(preds, truth));
    CHECK(accuracy_unknown(rev_preds) == accuracy_unknown(preds));
}

TEST_CASE("evaluate_predictions reconciles every count") {
    std::vector<Prediction> known = {accepted_as(0), accepted_as(0), accepted_as(1), rejected()};
    std::vector<ActivityLabel> truth = {kLabels[0], kLabels[0], kLabels[2], kLabels[3]};
    std::vector<Prediction> unknown = {rejected(), rejected(), accepted_as(2)};

    const EvalReport report = evaluate_predictions(known, truth, unknown, kLabels);
    CHECK(report.known_total == 4);
    CHECK(report.correct == 2);
    CHECK(report.wrong_label == 1);
    CHECK(report.falsely_rejected == 1);
    CHECK(report.known_accuracy == 0.5);
    CHECK(report.unknown_total == 3);
    CHECK(report.falsely_accepted == 1);
    CHECK(report.unknown_rejection == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(report.correct + report.wrong_label + report.falsely_rejected == report.known_total);

    // per-class bookkeeping: class 0 has 2 correct of 2; class 1 predicted once, wrongly
    CHECK(report.per_class[0].support == 2);
    CHECK(report.per_class[0].correct == 2);
    CHECK(report.per_class[0].precision == 1.0);
    CHECK(report.per_class[0].recall == 1.0);
    CHECK(report.per_class[1].precision == 0.0);
    CHECK(report.per_class[2].recall == 0.0);
}

TEST_CASE("misclass row is the percentage split of accepted instances") {
    std::vector<Prediction> preds = {accepted_as(0), accepted_as(1), rejected(), accepted_as(0)};
    const MisclassRow row = misclass_row(preds, kLabels);
    CHECK(row.total == 4);
    CHECK(row.accepted == 3);
    CHECK(row.pct.at("facebook") == 100.0);
    CHECK(row.pct.count("gmail") == 0);

    // degenerate: everything lands on one app
    double total = 0.0;
    for (const auto& [app, pct] : row.pct) total += pct;
    CHECK(total == doctest::Approx(100.0).epsilon(1e-9));

    const MisclassRow empty = misclass_row({rejected(), rejected()}, kLabels);
    CHECK(empty.empty());
    CHECK(empty.pct.empty());
}

TEST_CASE("misclassification matrix rows sum to 100 and keep empty rows empty") {
    Rng rng(72);
    std::map<std::string, std::vector<Prediction>> groups;
    for (const char* app : {"viber", "whatsapp"}) {
        std::vector<Prediction> preds;
        for (int i = 0; i < 200; ++i) {
            if (rng.u01() < 0.4) preds.push_back(rejected());
            else preds.push_back(accepted_as(rng.below(kLabels.size())));
        }
        groups[app] = std::move(preds);
    }
    groups["silent"] = {rejected(), rejected()};

    const MisclassMatrix matrix = misclassification_matrix(groups, kLabels);
    CHECK(matrix.trained_apps == std::vector<std::string>{"facebook", "gmail", "skype"});
    REQUIRE(matrix.rows.size() == 3);
    for (const char* app : {"viber", "whatsapp"}) {
        double total = 0.0;
        std::size_t recount = 0;
        for (const auto& [col, pct] : matrix.rows.at(app).pct) total += pct;
        for (const Prediction& p : groups.at(app)) {
            if (p.verdict) ++recount;
        }
        CHECK(total == doctest::Approx(100.0).epsilon(1e-9));
        CHECK(matrix.rows.at(app).accepted == recount);
    }
    CHECK(matrix.rows.at("silent").empty());

    const std::string csv = matrix.to_csv();
    CHECK(csv.rfind("test_app,facebook,gmail,skype\n", 0) == 0);
}

namespace {

// Apps own opposite vertices of a hexagon in the first two feature
// dimensions. Any held-out cluster then sits symmetrically between two
// trained clusters, the regime confidence thresholding rejects.
FeatureVector ring_point(Rng& rng, const ActivityLabel& label, double angle_deg,
                         double radius = 4.0) {
    FeatureVector fv;
    fv.label = label;
    for (std::size_t j = 0; j < kFeatureCount; ++j) fv.values[j] = rng.normal() * 0.15;
    const double a = angle_deg * 3.14159265358979323846 / 180.0;
    fv.values[0] += radius * std::cos(a);
    fv.values[1] += radius * std::sin(a);
    return fv;
}

std::vector<FeatureVector> loao_dataset(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<FeatureVector> rows;
    struct Spec {
        const char* app;
        const char* activity;
        double angle;
    };
    const Spec specs[] = {
        {"appa", "one", 0.0},   {"appa", "two", 180.0},
        {"appb", "one", 60.0},  {"appb", "two", 240.0},
        {"appc", "one", 120.0}, {"appc", "two", 300.0},
    };
    for (const Spec& spec : specs) {
        for (int i = 0; i < 100; ++i) {
            rows.push_back(ring_point(rng, {spec.app, spec.activity}, spec.angle));
        }
    }
    return rows;
}

ModelConfig loao_config() {
    ModelConfig config;
    config.hidden_dims = {32};
    config.learning_rate = 0.01;
    config.batch_size = 32;
    config.epochs = 80;
    config.dropout_rate = 0.1;
    config.seed = 5;
    return config;
}

} // namespace

TEST_CASE("leave_one_app_out runs once per app and never trains on the held-out app") {
    const auto rows = loao_dataset(73);
    TauPolicy policy; // fixed 0.97
    const LoaoReport report = leave_one_app_out(rows, loao_config(), policy);

    REQUIRE(report.runs.size() == 3);
    CHECK(report.apps == std::vector<std::string>{"appa", "appb", "appc"});
    double mean = 0.0;
    for (const LoaoRun& run : report.runs) {
        CHECK(run.tau == 0.97);
        CHECK(run.test_size == 200);
        CHECK(run.trained_apps.size() == 2);
        for (const std::string& app : run.trained_apps) CHECK(app != run.held_out_app);
        if (!run.misclass.empty()) {
            double total = 0.0;
            for (const auto& [app, pct] : run.misclass.pct) {
                total += pct;
                CHECK(pct >= 0.0);
                CHECK(app != run.held_out_app);
            }
            CHECK(std::fabs(total - 100.0) <= 1.0);
        }
        mean += run.detection_rate;
    }
    CHECK(report.mean_detection_rate == doctest::Approx(mean / 3.0).epsilon(1e-12));

    // determinism: identical reports on a re-run
    const LoaoReport again = leave_one_app_out(rows, loao_config(), policy);
    CHECK(again.report_csv() == report.report_csv());
    CHECK(again.misclass_csv() == report.misclass_csv());
}

TEST_CASE("leave_one_app_out rejects well-separated held-out apps at the recommended tau") {
    const auto rows = loao_dataset(74);

    // designated calibration noise at other ring midpoints, never an
    // evaluated app
    Rng rng(75);
    TauPolicy policy;
    policy.kind = TauPolicy::Kind::sweep;
    for (int i = 0; i < 40; ++i) {
        for (double angle : {30.0, 150.0, 270.0}) {
            policy.calibration_unknown.push_back(
                ring_point(rng, ActivityLabel{"calib", "noise"}, angle));
        }
    }

    const LoaoReport report = leave_one_app_out(rows, loao_config(), policy);
    REQUIRE(report.runs.size() == 3);
    for (const LoaoRun& run : report.runs) {
        CHECK(run.tau > 0.0);
        CHECK(run.tau < 1.0);
        CHECK(run.detection_rate >= 0.70);
    }
}

TEST_CASE("leave_one_app_out skips degenerate inputs with warnings") {
    auto rows = loao_dataset(76);
    FeatureVector lonely;
    lonely.label = ActivityLabel{"appd", "single"};
    rows.push_back(lonely); // appd appears once: its class is excluded
    const LoaoReport report = leave_one_app_out(rows, loao_config(), TauPolicy{});
    CHECK(report.runs.size() == 4); // appd still gets held out; training set unaffected
    REQUIRE_FALSE(report.warnings.empty());
    CHECK(report.warnings[0].find("appd/single") != std::string::npos);

    std::vector<FeatureVector> one_app(rows.begin(), rows.begin() + 200);
    CHECK_THROWS_AS(leave_one_app_out(one_app, loao_config(), TauPolicy{}), input_error);

    TauPolicy sweep_no_calib;
    sweep_no_calib.kind = TauPolicy::Kind::sweep;
    CHECK_THROWS_AS(leave_one_app_out(rows, loao_config(), sweep_no_calib), input_error);
}
