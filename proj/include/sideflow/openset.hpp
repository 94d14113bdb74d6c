#pragma once

#include "sideflow/capture.hpp"
#include "sideflow/dnn.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sideflow {

// Softmax output plus the verdict derived from it. The rule: the instance
// is accepted as the argmax label iff p_max >= threshold, otherwise it is
// declared unknown. Equality accepts; argmax ties break to the lowest
// index.
struct Prediction {
    std::vector<double> probabilities;
    double p_max = 0.0;
    std::size_t argmax_index = 0;
    std::optional<ActivityLabel> verdict; // nullopt = unknown
};

Prediction classify(const std::vector<double>& probabilities, double threshold,
                    const std::vector<ActivityLabel>& label_map);

// Uniform bins over [0, 1]; a p_max of exactly 1.0 lands in the last bin.
struct Histogram {
    std::vector<double> edges;              // bin_count + 1 edges, edges[i] = i/bins
    std::vector<std::size_t> known_count;   // per bin
    std::vector<std::size_t> unknown_count; // per bin

    std::string to_csv() const; // bin_lo,bin_hi,known_count,unknown_count
};

Histogram confidence_histogram(const std::vector<Prediction>& known,
                               const std::vector<Prediction>& unknown,
                               std::size_t bin_count);

struct SweepPoint {
    double tau = 0.0;
    double known_accuracy = 0.0;  // correct and accepted, over all known instances
    double unknown_rejection = 0.0;
    std::size_t known_correct = 0;
    std::size_t known_wrong_label = 0;
    std::size_t known_rejected = 0;
    std::size_t unknown_rejected = 0;
    std::size_t unknown_accepted = 0;
};

struct SweepReport {
    std::vector<SweepPoint> points; // sorted by tau ascending
    double recommended_tau = 0.0;   // maximizes (known_acc + unknown_rej)/2, ties to larger tau

    std::string to_csv() const;
};

// Re-scores both evaluation sets at every tau in the grid. Known
// instances need true labels; unknown instances are scored purely on
// whether they get rejected.
SweepReport sweep_threshold(const ModelArtifact& artifact,
                            const std::vector<FeatureVector>& known_eval,
                            const std::vector<FeatureVector>& unknown_eval,
                            const std::vector<double>& tau_grid);

// Same sweep on precomputed probability rows; known_truth aligns with
// known_probs rows.
SweepReport sweep_threshold(const Matrix& known_probs,
                            const std::vector<ActivityLabel>& known_truth,
                            const Matrix& unknown_probs,
                            const std::vector<ActivityLabel>& label_map,
                            const std::vector<double>& tau_grid);

std::vector<double> uniform_tau_grid(std::size_t points); // 0, 1/(n-1), ..., 1

} // namespace sideflow
