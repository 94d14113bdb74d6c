#include "sideflow/openset.hpp"

#include "sideflow/errors.hpp"
#include "sideflow/util.hpp"

#include <algorithm>
#include <cmath>

namespace sideflow {

Prediction classify(const std::vector<double>& probabilities, double threshold,
                    const std::vector<ActivityLabel>& label_map) {
    if (probabilities.empty()) throw input_error("cannot classify an empty probability vector");
    if (probabilities.size() != label_map.size()) {
        throw input_error("probability vector length does not match label map");
    }
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw input_error("threshold must lie in [0, 1]");

    Prediction pred;
    pred.probabilities = probabilities;
    pred.argmax_index = 0;
    for (std::size_t j = 1; j < probabilities.size(); ++j) {
        if (probabilities[j] > probabilities[pred.argmax_index]) pred.argmax_index = j;
    }
    pred.p_max = probabilities[pred.argmax_index];
    if (pred.p_max >= threshold) pred.verdict = label_map[pred.argmax_index];
    return pred;
}

namespace {

std::size_t bin_for(double p, const std::vector<double>& edges) {
    const std::size_t bins = edges.size() - 1;
    std::size_t b = std::min(static_cast<std::size_t>(p * static_cast<double>(bins)), bins - 1);
    while (b + 1 < bins && edges[b + 1] <= p) ++b;
    while (b > 0 && edges[b] > p) --b;
    return b;
}

} // namespace

Histogram confidence_histogram(const std::vector<Prediction>& known,
                               const std::vector<Prediction>& unknown,
                               std::size_t bin_count) {
    if (bin_count < 2) throw input_error("histogram needs at least 2 bins");
    Histogram h;
    h.edges.resize(bin_count + 1);
    for (std::size_t i = 0; i <= bin_count; ++i) {
        h.edges[i] = static_cast<double>(i) / static_cast<double>(bin_count);
    }
    h.known_count.assign(bin_count, 0);
    h.unknown_count.assign(bin_count, 0);
    for (const Prediction& p : known) ++h.known_count[bin_for(p.p_max, h.edges)];
    for (const Prediction& p : unknown) ++h.unknown_count[bin_for(p.p_max, h.edges)];
    return h;
}

std::string Histogram::to_csv() const {
    std::string out = "bin_lo,bin_hi,known_count,unknown_count\n";
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        out += format_double(edges[i]) + "," + format_double(edges[i + 1]) + "," +
               std::to_string(known_count[i]) + "," + std::to_string(unknown_count[i]) + "\n";
    }
    return out;
}

std::vector<double> uniform_tau_grid(std::size_t points) {
    if (points < 2) throw input_error("tau grid needs at least 2 points");
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return grid;
}

SweepReport sweep_threshold(const Matrix& known_probs,
                            const std::vector<ActivityLabel>& known_truth,
                            const Matrix& unknown_probs,
                            const std::vector<ActivityLabel>& label_map,
                            const std::vector<double>& tau_grid) {
    if (tau_grid.empty()) throw input_error("tau grid is empty");
    if (known_probs.rows == 0 || unknown_probs.rows == 0) {
        throw input_error("sweep needs non-empty known and unknown evaluation sets");
    }
    if (known_truth.size() != known_probs.rows) throw input_error("known truth size mismatch");
    for (double tau : tau_grid) {
        if (!(tau >= 0.0 && tau <= 1.0)) throw input_error("tau grid values must lie in [0, 1]");
    }

    // (p_max, correct argmax) is a sufficient summary of each instance for
    // every tau, so extract it once.
    struct KnownRow { double p_max; bool correct; };
    std::vector<KnownRow> known;
    known.reserve(known_probs.rows);
    for (std::size_t i = 0; i < known_probs.rows; ++i) {
        const double* row = known_probs.row(i);
        std::size_t arg = 0;
        for (std::size_t j = 1; j < known_probs.cols; ++j) {
            if (row[j] > row[arg]) arg = j;
        }
        known.push_back({row[arg], label_map[arg] == known_truth[i]});
    }
    std::vector<double> unknown_pmax;
    unknown_pmax.reserve(unknown_probs.rows);
    for (std::size_t i = 0; i < unknown_probs.rows; ++i) {
        const double* row = unknown_probs.row(i);
        unknown_pmax.push_back(*std::max_element(row, row + unknown_probs.cols));
    }

    std::vector<double> grid = tau_grid;
    std::sort(grid.begin(), grid.end());

    SweepReport report;
    double best_score = -1.0;
    for (double tau : grid) {
        SweepPoint pt;
        pt.tau = tau;
        for (const KnownRow& row : known) {
            if (row.p_max >= tau) {
                ++(row.correct ? pt.known_correct : pt.known_wrong_label);
            } else {
                ++pt.known_rejected;
            }
        }
        for (double p : unknown_pmax) {
            ++(p >= tau ? pt.unknown_accepted : pt.unknown_rejected);
        }
        pt.known_accuracy = static_cast<double>(pt.known_correct) / static_cast<double>(known.size());
        pt.unknown_rejection = static_cast<double>(pt.unknown_rejected) / static_cast<double>(unknown_pmax.size());
        const double score = 0.5 * (pt.known_accuracy + pt.unknown_rejection);
        if (score >= best_score) {
            best_score = score;
            report.recommended_tau = tau;
        }
        report.points.push_back(pt);
    }
    return report;
}

SweepReport sweep_threshold(const ModelArtifact& artifact,
                            const std::vector<FeatureVector>& known_eval,
                            const std::vector<FeatureVector>& unknown_eval,
                            const std::vector<double>& tau_grid) {
    if (known_eval.empty() || unknown_eval.empty()) {
        throw input_error("sweep needs non-empty known and unknown evaluation sets");
    }
    std::vector<ActivityLabel> truth;
    truth.reserve(known_eval.size());
    for (const FeatureVector& fv : known_eval) {
        if (!fv.label) throw input_error("known evaluation rows must be labeled");
        truth.push_back(*fv.label);
    }
    const Matrix known_probs = predict_proba(artifact, known_eval);
    const Matrix unknown_probs = predict_proba(artifact, unknown_eval);
    return sweep_threshold(known_probs, truth, unknown_probs, artifact.label_map, tau_grid);
}

std::string SweepReport::to_csv() const {
    std::string out = "tau,known_acc,unknown_rej,known_correct,known_wrong_label,"
                      "known_rejected,unknown_rejected,unknown_accepted\n";
    for (const SweepPoint& pt : points) {
        out += format_double(pt.tau) + "," + format_double(pt.known_accuracy) + "," +
               format_double(pt.unknown_rejection) + "," + std::to_string(pt.known_correct) + "," +
               std::to_string(pt.known_wrong_label) + "," + std::to_string(pt.known_rejected) + "," +
               std::to_string(pt.unknown_rejected) + "," + std::to_string(pt.unknown_accepted) + "\n";
    }
    return out;
}

} // namespace sideflow
