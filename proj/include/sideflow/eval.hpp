#pragma once

#include "sideflow/dnn.hpp"
#include "sideflow/features.hpp"
#include "sideflow/openset.hpp"

#include <map>
#include <string>
#include <vector>

namespace sideflow {

// Classifies every row at the given threshold (the artifact's own when
// tau < 0 is passed).
std::vector<Prediction> predict_all(const ModelArtifact& artifact,
                                    const std::vector<FeatureVector>& rows,
                                    double tau = -1.0);

// Fraction of known instances that were accepted AND assigned their true
// label; a rejected known instance counts as an error.
double accuracy_known(const std::vector<Prediction>& predictions,
                      const std::vector<ActivityLabel>& truth);

// Fraction of truly-unknown instances with verdict unknown (the noise
// detection rate). Throws on an empty set.
double accuracy_unknown(const std::vector<Prediction>& predictions);

struct PerClassStats {
    ActivityLabel label;
    std::size_t support = 0; // true instances of this class in the known set
    std::size_t correct = 0; // accepted with the right label
    double precision = 0.0;  // over accepted known instances predicted as this class
    double recall = 0.0;
};

struct EvalReport {
    std::size_t known_total = 0;
    std::size_t unknown_total = 0;
    double known_accuracy = 0.0;
    double unknown_rejection = 0.0; // meaningful only when unknown_total > 0
    std::size_t correct = 0;
    std::size_t wrong_label = 0;
    std::size_t falsely_rejected = 0; // known but rejected
    std::size_t falsely_accepted = 0; // unknown but accepted
    std::vector<PerClassStats> per_class;

    std::string to_csv() const;       // metric,value pairs
    std::string per_class_csv() const;
    std::string to_text() const;
};

EvalReport evaluate_predictions(const std::vector<Prediction>& known_preds,
                                const std::vector<ActivityLabel>& known_truth,
                                const std::vector<Prediction>& unknown_preds,
                                const std::vector<ActivityLabel>& label_map);

// Distribution (percent) over trained apps of where one held-out app's
// accepted-as-known traffic was assigned. A row with no accepted
// instances is kept but marked empty rather than filled with NaNs.
struct MisclassRow {
    std::size_t accepted = 0;
    std::size_t total = 0;
    std::map<std::string, double> pct; // trained app -> percentage, sums to 100

    bool empty() const { return accepted == 0; }
};

MisclassRow misclass_row(const std::vector<Prediction>& predictions,
                         const std::vector<ActivityLabel>& label_map);

struct MisclassMatrix {
    std::vector<std::string> test_apps;    // row order
    std::vector<std::string> trained_apps; // column order
    std::map<std::string, MisclassRow> rows;

    std::string to_csv() const;
};

MisclassMatrix misclassification_matrix(
    const std::map<std::string, std::vector<Prediction>>& per_app_predictions,
    const std::vector<ActivityLabel>& label_map);

// Per-run rejection threshold selection for leave_one_app_out. The sweep
// policy calibrates on the run's own validation split (known side) against
// caller-designated unknown data; the held-out app itself is never used
// for calibration.
struct TauPolicy {
    enum class Kind { fixed, sweep };
    Kind kind = Kind::fixed;
    double fixed_tau = kDefaultRejectionThreshold;
    std::vector<double> grid;                        // sweep grid; empty = 101 uniform points
    std::vector<FeatureVector> calibration_unknown;  // required for sweep
};

struct LoaoRun {
    std::string held_out_app;
    std::vector<std::string> trained_apps;
    double tau = 0.0;
    double detection_rate = 0.0;      // accuracy_unknown on the held-out app
    double validation_accuracy = 0.0; // final epoch of the run's training
    std::size_t test_size = 0;
    MisclassRow misclass;
};

struct LoaoReport {
    std::vector<LoaoRun> runs;
    double mean_detection_rate = 0.0;
    std::vector<std::string> apps; // sorted; matrix rows and columns
    std::vector<std::string> warnings;

    std::string report_csv() const;   // test_no,trained_apps,held_out_app,...
    std::string misclass_csv() const; // combined matrix, blank diagonal
    std::string to_text() const;
};

// For each app: trains on every other app's activities, scores how much of
// the held-out app's traffic gets rejected at the policy's threshold, and
// records where the accepted remainder was assigned. Classes with fewer
// than 2 samples are excluded (warning); an app is skipped (warning) when
// the remaining training set would have fewer than 2 classes.
LoaoReport leave_one_app_out(const std::vector<FeatureVector>& features,
                             const ModelConfig& config, const TauPolicy& policy);

} // namespace sideflow
