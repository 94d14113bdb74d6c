#pragma once

#include "sideflow/capture.hpp"
#include "sideflow/features.hpp"
#include "sideflow/matrix.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sideflow {

// Verdict boundary shipped with every trained artifact; can be overridden
// per run. See openset.hpp for the classification rule.
inline constexpr double kDefaultRejectionThreshold = 0.97;

struct ModelConfig {
    std::size_t input_dim = kFeatureCount;
    std::vector<std::size_t> hidden_dims = {1024, 512, 256, 128};
    std::size_t output_dim = 0; // resolved from the label set when 0
    std::string hidden_activation = "tanh";
    double dropout_rate = 0.3;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t batch_size = 2048;
    std::size_t epochs = 100;
    std::uint64_t seed = 0;

    // Sizes of every affine layer in order, [in, h..., out].
    std::vector<std::size_t> layer_dims() const;
    void validate() const;
};

// One affine layer: w is fan_out x fan_in, b has fan_out entries.
struct LayerParams {
    Matrix w;
    std::vector<double> b;

    bool operator==(const LayerParams&) const = default;
};

struct ModelParams {
    std::vector<LayerParams> layers;

    bool operator==(const ModelParams&) const = default;
};

using Gradients = ModelParams; // same shapes, holds d(loss)/d(param)

enum class RunMode { train, infer };

// Everything backward() needs to replay a training-mode forward pass:
// inputs, per-hidden-layer tanh outputs, and the dropout scale factors
// (0 or 1/keep) actually drawn.
struct ForwardCache {
    Matrix input;
    std::vector<Matrix> hidden;
    std::vector<Matrix> mask; // empty when no dropout was applied
    Matrix probs;
};

// Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases,
// fully determined by the seed.
ModelParams init_model(const ModelConfig& config, std::uint64_t seed);

// Affine + tanh through the hidden stack, affine + max-subtracted softmax
// at the output. Training mode applies inverted dropout after each hidden
// activation (survivors scaled by 1/keep) with masks drawn from mask_seed;
// inference applies neither mask nor scale. Rows of the result sum to 1.
Matrix forward(const ModelParams& params, const Matrix& batch, RunMode mode,
               double dropout_rate, std::uint64_t mask_seed,
               ForwardCache* cache = nullptr);

// Mean over the batch of -log p_true, probabilities clamped at 1e-12.
double loss_cce(const Matrix& probabilities, const Matrix& one_hot_targets);
double loss_cce(const Matrix& probabilities, const std::vector<std::size_t>& target_index);

// Exact gradients of loss_cce via the fused softmax/cross-entropy delta
// (probs - onehot)/batch, replaying the cached dropout masks.
Gradients backward(const ModelParams& params, const ForwardCache& cache,
                   const std::vector<std::size_t>& target_index);

struct AdamState {
    struct Slot {
        Matrix m_w, v_w;
        std::vector<double> m_b, v_b;
    };
    std::vector<Slot> slots;

    static AdamState zeros_like(const ModelParams& params);
};

// One bias-corrected Adam update, step index t >= 1. Params and state are
// advanced in place.
void adam_step(AdamState& state, ModelParams& params, const Gradients& grads,
               std::uint64_t t, const ModelConfig& config);

struct EpochStats {
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    std::uint64_t seed = 0;
    std::size_t train_size = 0;
    std::size_t val_size = 0;

    std::string to_csv() const;
};

// The deployable unit: network weights, the scaler fitted on the training
// split, the label order behind the output nodes, and the rejection
// threshold.
struct ModelArtifact {
    ModelConfig config;
    ModelParams params;
    Scaler scaler;
    std::vector<ActivityLabel> label_map; // output node i predicts label_map[i]
    double threshold = kDefaultRejectionThreshold;
};

// The 80/20 split used by train(): per class, indices are shuffled with a
// generator seeded from `seed` and round(0.8*n) of them (clamped to
// [1, n-1]) go to the training side. Exposed so calibration code can
// reconstruct the exact validation set of a training run.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split_indices(const std::vector<FeatureVector>& features, std::uint64_t seed);

// Full pipeline: stratified seeded 80/20 split per class, scaler fitted on
// the 80% side only, seeded per-epoch shuffling, per-epoch metrics.
// Requires >= 2 classes and >= 2 samples in each.
std::pair<ModelArtifact, TrainReport>
train(const std::vector<FeatureVector>& features, const ModelConfig& config,
      double threshold = kDefaultRejectionThreshold);

// Scales the raw vector with the artifact's scaler and runs inference.
std::vector<double> predict_proba(const ModelArtifact& artifact, const FeatureVector& raw);
Matrix predict_proba(const ModelArtifact& artifact, const std::vector<FeatureVector>& raw);

// Single-document JSON serialization, round-trip exact.
std::string artifact_to_json(const ModelArtifact& artifact);
ModelArtifact artifact_from_json(const std::string& text);
void save_artifact(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_artifact(const std::string& path);

// Reads ModelConfig overrides from a JSON document; unknown keys are
// rejected. Missing keys keep their defaults.
ModelConfig model_config_from_json(const std::string& text);
std::string model_config_to_json(const ModelConfig& config);

} // namespace sideflow
