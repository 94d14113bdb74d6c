#include "sideflow/eval.hpp"

#include "sideflow/errors.hpp"
#include "sideflow/util.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace sideflow {

std::vector<Prediction> predict_all(const ModelArtifact& artifact,
                                    const std::vector<FeatureVector>& rows,
                                    double tau) {
    const double threshold = tau < 0.0 ? artifact.threshold : tau;
    const Matrix probs = predict_proba(artifact, rows);
    std::vector<Prediction> preds;
    preds.reserve(rows.size());
    for (std::size_t i = 0; i < probs.rows; ++i) {
        preds.push_back(classify(std::vector<double>(probs.row(i), probs.row(i) + probs.cols),
                                 threshold, artifact.label_map));
    }
    return preds;
}

double accuracy_known(const std::vector<Prediction>& predictions,
                      const std::vector<ActivityLabel>& truth) {
    if (predictions.size() != truth.size()) throw input_error("accuracy_known: length mismatch");
    if (predictions.empty()) throw input_error("accuracy_known: empty set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i].verdict && *predictions[i].verdict == truth[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double accuracy_unknown(const std::vector<Prediction>& predictions) {
    if (predictions.empty()) throw input_error("accuracy_unknown: empty set");
    std::size_t rejected = 0;
    for (const Prediction& p : predictions) {
        if (!p.verdict) ++rejected;
    }
    return static_cast<double>(rejected) / static_cast<double>(predictions.size());
}

EvalReport evaluate_predictions(const std::vector<Prediction>& known_preds,
                                const std::vector<ActivityLabel>& known_truth,
                                const std::vector<Prediction>& unknown_preds,
                                const std::vector<ActivityLabel>& label_map) {
    if (known_preds.size() != known_truth.size()) throw input_error("evaluate: length mismatch");

    EvalReport report;
    report.known_total = known_preds.size();
    report.unknown_total = unknown_preds.size();

    std::map<ActivityLabel, std::size_t> class_of;
    for (std::size_t c = 0; c < label_map.size(); ++c) class_of[label_map[c]] = c;
    std::vector<std::size_t> support(label_map.size(), 0);
    std::vector<std::size_t> tp(label_map.size(), 0);
    std::vector<std::size_t> predicted(label_map.size(), 0); // accepted known rows per predicted class

    for (std::size_t i = 0; i < known_preds.size(); ++i) {
        const auto it = class_of.find(known_truth[i]);
        if (it == class_of.end()) {
            throw input_error("known instance labeled " + known_truth[i].str() +
                              " is not a trained class");
        }
        ++support[it->second];
        const Prediction& p = known_preds[i];
        if (!p.verdict) {
            ++report.falsely_rejected;
            continue;
        }
        ++predicted[p.argmax_index];
        if (*p.verdict == known_truth[i]) {
            ++report.correct;
            ++tp[it->second];
        } else {
            ++report.wrong_label;
        }
    }
    for (const Prediction& p : unknown_preds) {
        if (p.verdict) ++report.falsely_accepted;
    }

    if (report.known_total > 0) {
        report.known_accuracy = static_cast<double>(report.correct) /
                                static_cast<double>(report.known_total);
    }
    if (report.unknown_total > 0) {
        report.unknown_rejection =
            static_cast<double>(report.unknown_total - report.falsely_accepted) /
            static_cast<double>(report.unknown_total);
    }

    for (std::size_t c = 0; c < label_map.size(); ++c) {
        PerClassStats stats;
        stats.label = label_map[c];
        stats.support = support[c];
        stats.correct = tp[c];
        stats.precision = predicted[c] == 0
                              ? 0.0
                              : static_cast<double>(tp[c]) / static_cast<double>(predicted[c]);
        stats.recall = support[c] == 0
                           ? 0.0
                           : static_cast<double>(tp[c]) / static_cast<double>(support[c]);
        report.per_class.push_back(std::move(stats));
    }
    return report;
}

std::string EvalReport::to_csv() const {
    std::string out = "metric,value\n";
    out += "known_total," + std::to_string(known_total) + "\n";
    out += "unknown_total," + std::to_string(unknown_total) + "\n";
    out += "known_accuracy," + format_double(known_accuracy) + "\n";
    out += "unknown_rejection," + format_double(unknown_rejection) + "\n";
    out += "correct," + std::to_string(correct) + "\n";
    out += "wrong_label," + std::to_string(wrong_label) + "\n";
    out += "falsely_rejected," + std::to_string(falsely_rejected) + "\n";
    out += "falsely_accepted," + std::to_string(falsely_accepted) + "\n";
    return out;
}

std::string EvalReport::per_class_csv() const {
    std::string out = "app,activity,support,correct,precision,recall\n";
    for (const PerClassStats& s : per_class) {
        out += s.label.app + "," + s.label.activity + "," + std::to_string(s.support) + "," +
               std::to_string(s.correct) + "," + format_double(s.precision) + "," +
               format_double(s.recall) + "\n";
    }
    return out;
}

std::string EvalReport::to_text() const {
    std::ostringstream out;
    out << "known instances:   " << known_total << "\n";
    out << "  correct:         " << correct << "\n";
    out << "  wrong label:     " << wrong_label << "\n";
    out << "  falsely rejected:" << falsely_rejected << "\n";
    out << "  accuracy:        " << known_accuracy << "\n";
    if (unknown_total > 0) {
        out << "unknown instances: " << unknown_total << "\n";
        out << "  falsely accepted:" << falsely_accepted << "\n";
        out << "  rejection rate:  " << unknown_rejection << "\n";
    }
    return out.str();
}

MisclassRow misclass_row(const std::vector<Prediction>& predictions,
                         const std::vector<ActivityLabel>& label_map) {
    MisclassRow row;
    row.total = predictions.size();
    std::map<std::string, std::size_t> counts;
    for (const Prediction& p : predictions) {
        if (!p.verdict) continue;
        if (p.argmax_index >= label_map.size()) throw input_error("prediction outside label map");
        ++counts[label_map[p.argmax_index].app];
        ++row.accepted;
    }
    for (const auto& [app, count] : counts) {
        row.pct[app] = 100.0 * static_cast<double>(count) / static_cast<double>(row.accepted);
    }
    return row;
}

MisclassMatrix misclassification_matrix(
    const std::map<std::string, std::vector<Prediction>>& per_app_predictions,
    const std::vector<ActivityLabel>& label_map) {
    MisclassMatrix matrix;
    std::set<std::string> cols;
    for (const ActivityLabel& label : label_map) cols.insert(label.app);
    matrix.trained_apps.assign(cols.begin(), cols.end());
    for (const auto& [app, preds] : per_app_predictions) {
        matrix.test_apps.push_back(app);
        matrix.rows[app] = misclass_row(preds, label_map);
    }
    return matrix;
}

namespace {

std::string misclass_table_csv(const std::vector<std::string>& test_apps,
                               const std::vector<std::string>& cols,
                               const std::map<std::string, MisclassRow>& rows) {
    std::string out = "test_app";
    for (const std::string& app : cols) out += "," + app;
    out += "\n";
    for (const std::string& test_app : test_apps) {
        out += test_app;
        const MisclassRow& row = rows.at(test_app);
        for (const std::string& app : cols) {
            out += ",";
            if (app == test_app || row.empty()) continue;
            const auto it = row.pct.find(app);
            if (it != row.pct.end()) out += format_double(it->second);
            else out += "0";
        }
        out += "\n";
    }
    return out;
}

} // namespace

std::string MisclassMatrix::to_csv() const {
    return misclass_table_csv(test_apps, trained_apps, rows);
}

LoaoReport leave_one_app_out(const std::vector<FeatureVector>& features,
                             const ModelConfig& config, const TauPolicy& policy) {
    if (policy.kind == TauPolicy::Kind::sweep && policy.calibration_unknown.empty()) {
        throw input_error("sweep tau policy needs designated calibration unknown data");
    }

    std::map<std::string, std::vector<FeatureVector>> by_app;
    std::map<ActivityLabel, std::size_t> class_counts;
    for (const FeatureVector& fv : features) {
        if (!fv.label) throw input_error("leave_one_app_out rows must be labeled");
        by_app[fv.label->app].push_back(fv);
        ++class_counts[*fv.label];
    }
    if (by_app.size() < 2) throw input_error("leave_one_app_out needs at least 2 apps");

    LoaoReport report;
    std::set<ActivityLabel> excluded;
    for (const auto& [label, count] : class_counts) {
        if (count < 2) {
            excluded.insert(label);
            report.warnings.push_back("excluding class " + label.str() + " (fewer than 2 samples)");
        }
    }
    for (const auto& [app, rows] : by_app) report.apps.push_back(app);

    double rate_sum = 0.0;
    for (const std::string& held_out : report.apps) {
        std::vector<FeatureVector> train_set;
        std::set<ActivityLabel> train_classes;
        for (const auto& [app, rows] : by_app) {
            if (app == held_out) continue;
            for (const FeatureVector& fv : rows) {
                if (excluded.count(*fv.label)) continue;
                train_set.push_back(fv);
                train_classes.insert(*fv.label);
            }
        }
        if (train_classes.size() < 2) {
            report.warnings.push_back("skipping app " + held_out +
                                      " (remaining training set has fewer than 2 classes)");
            continue;
        }

        auto [artifact, train_report] = train(train_set, config, policy.fixed_tau);
        for (const ActivityLabel& label : artifact.label_map) {
            if (label.app == held_out) {
                throw std::runtime_error("held-out app leaked into the trained label map");
            }
        }

        double tau = policy.fixed_tau;
        if (policy.kind == TauPolicy::Kind::sweep) {
            const auto [tr_idx, val_idx] = stratified_split_indices(train_set, config.seed);
            (void)tr_idx;
            std::vector<FeatureVector> val_rows;
            val_rows.reserve(val_idx.size());
            for (std::size_t i : val_idx) val_rows.push_back(train_set[i]);
            const std::vector<double> grid =
                policy.grid.empty() ? uniform_tau_grid(101) : policy.grid;
            tau = sweep_threshold(artifact, val_rows, policy.calibration_unknown, grid)
                      .recommended_tau;
        }

        const std::vector<FeatureVector>& test_rows = by_app.at(held_out);
        const std::vector<Prediction> preds = predict_all(artifact, test_rows, tau);

        LoaoRun run;
        run.held_out_app = held_out;
        std::set<std::string> trained_app_set;
        for (const ActivityLabel& label : train_classes) trained_app_set.insert(label.app);
        run.trained_apps.assign(trained_app_set.begin(), trained_app_set.end());
        run.tau = tau;
        run.detection_rate = accuracy_unknown(preds);
        run.validation_accuracy = train_report.epochs.back().validation_accuracy;
        run.test_size = test_rows.size();
        run.misclass = misclass_row(preds, artifact.label_map);
        rate_sum += run.detection_rate;
        report.runs.push_back(std::move(run));
    }

    if (report.runs.empty()) throw input_error("leave_one_app_out produced no runs");
    report.mean_detection_rate = rate_sum / static_cast<double>(report.runs.size());
    return report;
}

std::string LoaoReport::report_csv() const {
    std::string out =
        "test_no,trained_apps,held_out_app,detection_rate,validation_accuracy,tau,test_segments\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const LoaoRun& run = runs[i];
        out += "T" + std::to_string(i + 1) + "," + join(run.trained_apps, "+") + "," +
               run.held_out_app + "," + format_double(run.detection_rate) + "," +
               format_double(run.validation_accuracy) + "," + format_double(run.tau) + "," +
               std::to_string(run.test_size) + "\n";
    }
    out += "mean,,," + format_double(mean_detection_rate) + ",,,\n";
    return out;
}

std::string LoaoReport::misclass_csv() const {
    std::vector<std::string> test_apps;
    std::map<std::string, MisclassRow> rows;
    for (const LoaoRun& run : runs) {
        test_apps.push_back(run.held_out_app);
        rows[run.held_out_app] = run.misclass;
    }
    return misclass_table_csv(test_apps, apps, rows);
}

std::string LoaoReport::to_text() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const LoaoRun& run = runs[i];
        out << "T" << i + 1 << "  held out " << run.held_out_app << "  detection "
            << run.detection_rate << "  (val acc " << run.validation_accuracy << ", tau "
            << run.tau << ", " << run.test_size << " segments)\n";
    }
    out << "mean detection rate: " << mean_detection_rate << "\n";
    for (const std::string& w : warnings) out << "warning: " << w << "\n";
    return out.str();
}

} // namespace sideflow
