#include "sideflow/dnn.hpp"

#include "sideflow/errors.hpp"
#include "sideflow/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace sideflow {

using nlohmann::json;

std::vector<std::size_t> ModelConfig::layer_dims() const {
    std::vector<std::size_t> dims;
    dims.push_back(input_dim);
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
    dims.push_back(output_dim);
    return dims;
}

void ModelConfig::validate() const {
    if (input_dim < 1) throw input_error("input_dim must be positive");
    if (hidden_dims.empty()) throw input_error("hidden_dims must be non-empty");
    for (std::size_t h : hidden_dims) {
        if (h < 1) throw input_error("hidden layer sizes must be positive");
    }
    if (output_dim < 2) throw input_error("output_dim must be at least 2");
    if (hidden_activation != "tanh") throw input_error("unsupported hidden activation \"" + hidden_activation + "\"");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw input_error("dropout_rate must lie in [0, 1)");
    if (!(learning_rate > 0.0)) throw input_error("learning_rate must be positive");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        throw input_error("adam betas must lie in [0, 1)");
    }
    if (!(adam_epsilon > 0.0)) throw input_error("adam_epsilon must be positive");
    if (batch_size < 1) throw input_error("batch_size must be positive");
    if (epochs < 1) throw input_error("epochs must be positive");
}

ModelParams init_model(const ModelConfig& config, std::uint64_t seed) {
    const std::vector<std::size_t> dims = config.layer_dims();
    Rng rng(seed);
    ModelParams params;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = dims[l];
        const std::size_t fan_out = dims[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        LayerParams layer;
        layer.w = Matrix(fan_out, fan_in);
        for (double& w : layer.w.data) w = rng.uniform(-limit, limit);
        layer.b.assign(fan_out, 0.0);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

namespace {

void affine_into(const Matrix& input, const LayerParams& layer, Matrix& out) {
    out = matmul_nt(input, layer.w);
    for (std::size_t i = 0; i < out.rows; ++i) {
        double* row = out.row(i);
        for (std::size_t j = 0; j < out.cols; ++j) row[j] += layer.b[j];
    }
}

} // namespace

Matrix forward(const ModelParams& params, const Matrix& batch, RunMode mode,
               double dropout_rate, std::uint64_t mask_seed, ForwardCache* cache) {
    if (params.layers.empty()) throw input_error("model has no layers");
    if (batch.cols != params.layers.front().w.cols) {
        throw input_error("batch width " + std::to_string(batch.cols) +
                          " does not match model input " +
                          std::to_string(params.layers.front().w.cols));
    }
    const std::size_t n_hidden = params.layers.size() - 1;
    const bool use_dropout = mode == RunMode::train && dropout_rate > 0.0;
    Rng mask_rng(mask_seed);

    if (cache) {
        cache->input = batch;
        cache->hidden.clear();
        cache->mask.clear();
    }

    Matrix h = batch;
    for (std::size_t l = 0; l < n_hidden; ++l) {
        Matrix t;
        affine_into(h, params.layers[l], t);
        for (double& v : t.data) v = std::tanh(v);
        if (cache) cache->hidden.push_back(t);
        if (use_dropout) {
            const double keep_scale = 1.0 / (1.0 - dropout_rate);
            Matrix mask(t.rows, t.cols);
            for (double& m : mask.data) {
                m = mask_rng.u01() < dropout_rate ? 0.0 : keep_scale;
            }
            for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] *= mask.data[i];
            if (cache) cache->mask.push_back(std::move(mask));
        }
        h = std::move(t);
    }

    Matrix logits;
    affine_into(h, params.layers.back(), logits);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        double* row = logits.row(i);
        double mx = row[0];
        for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, row[j]);
        double total = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) {
            row[j] = std::exp(row[j] - mx);
            total += row[j];
        }
        if (!std::isfinite(total) || total <= 0.0) {
            throw std::runtime_error("non-finite activation in forward pass (divergence)");
        }
        for (std::size_t j = 0; j < logits.cols; ++j) row[j] /= total;
    }
    if (cache) cache->probs = logits;
    return logits;
}

double loss_cce(const Matrix& probabilities, const Matrix& one_hot_targets) {
    if (probabilities.rows != one_hot_targets.rows || probabilities.cols != one_hot_targets.cols) {
        throw input_error("loss_cce: shape mismatch");
    }
    if (probabilities.rows == 0) throw input_error("loss_cce: empty batch");
    double acc = 0.0;
    for (std::size_t i = 0; i < probabilities.rows; ++i) {
        double p_true = 0.0;
        const double* p = probabilities.row(i);
        const double* y = one_hot_targets.row(i);
        for (std::size_t j = 0; j < probabilities.cols; ++j) p_true += y[j] * p[j];
        acc += -std::log(std::max(p_true, 1e-12));
    }
    return acc / static_cast<double>(probabilities.rows);
}

double loss_cce(const Matrix& probabilities, const std::vector<std::size_t>& target_index) {
    if (probabilities.rows != target_index.size()) throw input_error("loss_cce: shape mismatch");
    if (probabilities.rows == 0) throw input_error("loss_cce: empty batch");
    double acc = 0.0;
    for (std::size_t i = 0; i < probabilities.rows; ++i) {
        acc += -std::log(std::max(probabilities.at(i, target_index[i]), 1e-12));
    }
    return acc / static_cast<double>(probabilities.rows);
}

Gradients backward(const ModelParams& params, const ForwardCache& cache,
                   const std::vector<std::size_t>& target_index) {
    const std::size_t n_layers = params.layers.size();
    const std::size_t n_hidden = n_layers - 1;
    if (cache.hidden.size() != n_hidden || cache.probs.rows != cache.input.rows) {
        throw input_error("backward: stale or missing forward cache");
    }
    if (target_index.size() != cache.probs.rows) throw input_error("backward: target size mismatch");
    const std::size_t batch = cache.probs.rows;
    const bool masked = !cache.mask.empty();

    Gradients grads;
    grads.layers.resize(n_layers);

    // fused softmax + cross-entropy delta
    Matrix delta = cache.probs;
    const double inv_batch = 1.0 / static_cast<double>(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        delta.at(i, target_index[i]) -= 1.0;
        double* row = delta.row(i);
        for (std::size_t j = 0; j < delta.cols; ++j) row[j] *= inv_batch;
    }

    auto dropped_hidden = [&](std::size_t l) {
        Matrix h = cache.hidden[l];
        if (masked) {
            for (std::size_t i = 0; i < h.data.size(); ++i) h.data[i] *= cache.mask[l].data[i];
        }
        return h;
    };

    for (std::size_t l = n_layers; l-- > 0;) {
        const Matrix h_prev = l == 0 ? cache.input : dropped_hidden(l - 1);
        grads.layers[l].w = matmul_tn(delta, h_prev);
        grads.layers[l].b.assign(params.layers[l].w.rows, 0.0);
        for (std::size_t i = 0; i < delta.rows; ++i) {
            const double* row = delta.row(i);
            for (std::size_t j = 0; j < delta.cols; ++j) grads.layers[l].b[j] += row[j];
        }
        if (l == 0) break;

        Matrix dh = matmul(delta, params.layers[l].w);
        const Matrix& t = cache.hidden[l - 1];
        for (std::size_t i = 0; i < dh.data.size(); ++i) {
            double g = dh.data[i];
            if (masked) g *= cache.mask[l - 1].data[i];
            dh.data[i] = g * (1.0 - t.data[i] * t.data[i]);
        }
        delta = std::move(dh);
    }
    return grads;
}

AdamState AdamState::zeros_like(const ModelParams& params) {
    AdamState state;
    for (const LayerParams& layer : params.layers) {
        Slot slot;
        slot.m_w = Matrix(layer.w.rows, layer.w.cols);
        slot.v_w = Matrix(layer.w.rows, layer.w.cols);
        slot.m_b.assign(layer.b.size(), 0.0);
        slot.v_b.assign(layer.b.size(), 0.0);
        state.slots.push_back(std::move(slot));
    }
    return state;
}

void adam_step(AdamState& state, ModelParams& params, const Gradients& grads,
               std::uint64_t t, const ModelConfig& config) {
    if (t < 1) throw input_error("adam step index must be >= 1");
    if (state.slots.size() != params.layers.size() || grads.layers.size() != params.layers.size()) {
        throw input_error("adam_step: shape mismatch");
    }
    const double b1 = config.adam_beta1;
    const double b2 = config.adam_beta2;
    const double corr1 = 1.0 / (1.0 - std::pow(b1, static_cast<double>(t)));
    const double corr2 = 1.0 / (1.0 - std::pow(b2, static_cast<double>(t)));
    const double lr = config.learning_rate;
    const double eps = config.adam_epsilon;

    auto update = [&](double& p, double& m, double& v, double g) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        p -= lr * (m * corr1) / (std::sqrt(v * corr2) + eps);
    };

    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        LayerParams& layer = params.layers[l];
        const LayerParams& g = grads.layers[l];
        AdamState::Slot& slot = state.slots[l];
        if (g.w.rows != layer.w.rows || g.w.cols != layer.w.cols) {
            throw input_error("adam_step: gradient shape mismatch");
        }
        for (std::size_t i = 0; i < layer.w.data.size(); ++i) {
            update(layer.w.data[i], slot.m_w.data[i], slot.v_w.data[i], g.w.data[i]);
        }
        for (std::size_t i = 0; i < layer.b.size(); ++i) {
            update(layer.b[i], slot.m_b[i], slot.v_b[i], g.b[i]);
        }
    }
}

namespace {

Matrix rows_to_matrix(const std::vector<FeatureVector>& rows) {
    Matrix m(rows.size(), kFeatureCount);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < kFeatureCount; ++j) m.at(i, j) = rows[i].values[j];
    }
    return m;
}

Matrix take_rows(const Matrix& src, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), src.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* s = src.row(idx[i]);
        std::copy(s, s + src.cols, out.row(i));
    }
    return out;
}

// Chunked inference pass; bounds peak activation memory on large sets.
std::size_t count_correct(const ModelParams& params, const Matrix& x,
                          const std::vector<std::size_t>& y, std::size_t chunk) {
    std::size_t correct = 0;
    for (std::size_t start = 0; start < x.rows; start += chunk) {
        const std::size_t n = std::min(chunk, x.rows - start);
        Matrix sub(n, x.cols);
        std::copy(x.row(start), x.row(start) + n * x.cols, sub.data.begin());
        Matrix probs = forward(params, sub, RunMode::infer, 0.0, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = probs.row(i);
            std::size_t arg = 0;
            for (std::size_t j = 1; j < probs.cols; ++j) {
                if (row[j] > row[arg]) arg = j;
            }
            if (arg == y[start + i]) ++correct;
        }
    }
    return correct;
}

} // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split_indices(const std::vector<FeatureVector>& features, std::uint64_t seed) {
    if (features.empty()) throw input_error("cannot split an empty feature set");
    std::map<ActivityLabel, std::vector<std::size_t>> per_class;
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (!features[i].label) throw input_error("split rows must be labeled");
        per_class[*features[i].label].push_back(i);
    }

    Rng split_rng(derive_seed(seed, 0));
    std::vector<std::size_t> train_idx, val_idx;
    for (auto& [label, members] : per_class) {
        if (members.size() < 2) {
            throw input_error("class " + label.str() + " has fewer than 2 samples");
        }
        split_rng.shuffle(members);
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(0.8 * static_cast<double>(members.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
        train_idx.insert(train_idx.end(), members.begin(),
                         members.begin() + static_cast<std::ptrdiff_t>(n_train));
        val_idx.insert(val_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train),
                       members.end());
    }
    return {std::move(train_idx), std::move(val_idx)};
}

std::pair<ModelArtifact, TrainReport>
train(const std::vector<FeatureVector>& features, const ModelConfig& config_in,
      double threshold) {
    if (features.empty()) throw input_error("training set is empty");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw input_error("threshold must lie in [0, 1]");

    // label map: sorted distinct labels, index = output node
    std::map<ActivityLabel, std::size_t> label_index;
    for (const FeatureVector& fv : features) {
        if (!fv.label) throw input_error("training rows must be labeled");
        label_index.emplace(*fv.label, 0);
    }
    std::vector<ActivityLabel> label_map;
    for (auto& [label, idx] : label_index) {
        idx = label_map.size();
        label_map.push_back(label);
    }
    if (label_map.size() < 2) throw input_error("training needs at least 2 classes");

    ModelConfig config = config_in;
    if (config.output_dim == 0) config.output_dim = label_map.size();
    if (config.output_dim != label_map.size()) {
        throw input_error("config output_dim " + std::to_string(config.output_dim) +
                          " does not match " + std::to_string(label_map.size()) + " classes");
    }
    if (config.input_dim != kFeatureCount) throw input_error("input_dim must be 48 for feature vectors");
    config.validate();

    std::vector<std::size_t> y(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        y[i] = label_index.at(*features[i].label);
    }

    const auto [train_idx, val_idx] = stratified_split_indices(features, config.seed);

    std::vector<FeatureVector> train_rows;
    train_rows.reserve(train_idx.size());
    for (std::size_t i : train_idx) train_rows.push_back(features[i]);
    const Scaler scaler = fit_scaler(train_rows);

    std::vector<FeatureVector> scaled;
    scaled.reserve(features.size());
    for (const FeatureVector& fv : features) scaled.push_back(apply_scaler(scaler, fv));
    const Matrix all = rows_to_matrix(scaled);

    const Matrix x_train = take_rows(all, train_idx);
    const Matrix x_val = take_rows(all, val_idx);
    std::vector<std::size_t> y_train, y_val;
    for (std::size_t i : train_idx) y_train.push_back(y[i]);
    for (std::size_t i : val_idx) y_val.push_back(y[i]);

    ModelParams params = init_model(config, derive_seed(config.seed, 1));
    AdamState adam = AdamState::zeros_like(params);
    Rng epoch_rng(derive_seed(config.seed, 2));

    TrainReport report;
    report.seed = config.seed;
    report.train_size = train_idx.size();
    report.val_size = val_idx.size();

    std::vector<std::size_t> order(train_idx.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const std::size_t eval_chunk = std::max<std::size_t>(1, config.batch_size);
    std::uint64_t step = 0;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        epoch_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batch_no = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            ++batch_no;
            const std::size_t n = std::min(config.batch_size, order.size() - start);
            Matrix xb(n, x_train.cols);
            std::vector<std::size_t> yb(n);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t src = order[start + i];
                std::copy(x_train.row(src), x_train.row(src) + x_train.cols, xb.row(i));
                yb[i] = y_train[src];
            }
            ForwardCache cache;
            const std::uint64_t mask_seed = epoch_rng.next_u64();
            Matrix probs = forward(params, xb, RunMode::train, config.dropout_rate, mask_seed, &cache);
            const double loss = loss_cce(probs, yb);
            if (!std::isfinite(loss)) {
                throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch " + std::to_string(batch_no));
            }
            loss_sum += loss * static_cast<double>(n);
            Gradients grads = backward(params, cache, yb);
            adam_step(adam, params, grads, ++step, config);
        }

        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(order.size());
        stats.train_accuracy = static_cast<double>(count_correct(params, x_train, y_train, eval_chunk)) /
                               static_cast<double>(y_train.size());
        stats.validation_accuracy = static_cast<double>(count_correct(params, x_val, y_val, eval_chunk)) /
                                    static_cast<double>(y_val.size());
        report.epochs.push_back(stats);
    }

    ModelArtifact artifact;
    artifact.config = config;
    artifact.params = std::move(params);
    artifact.scaler = scaler;
    artifact.label_map = std::move(label_map);
    artifact.threshold = threshold;
    return {std::move(artifact), std::move(report)};
}

std::vector<double> predict_proba(const ModelArtifact& artifact, const FeatureVector& raw) {
    Matrix probs = predict_proba(artifact, std::vector<FeatureVector>{raw});
    return std::vector<double>(probs.data.begin(), probs.data.end());
}

Matrix predict_proba(const ModelArtifact& artifact, const std::vector<FeatureVector>& raw) {
    Matrix out(raw.size(), artifact.config.output_dim);
    const std::size_t chunk = 2048;
    for (std::size_t start = 0; start < raw.size(); start += chunk) {
        const std::size_t n = std::min(chunk, raw.size() - start);
        Matrix x(n, kFeatureCount);
        for (std::size_t i = 0; i < n; ++i) {
            const FeatureVector scaled = apply_scaler(artifact.scaler, raw[start + i]);
            std::copy(scaled.values.begin(), scaled.values.end(), x.row(i));
        }
        Matrix probs = forward(artifact.params, x, RunMode::infer, 0.0, 0);
        std::copy(probs.data.begin(), probs.data.end(), out.row(start));
    }
    return out;
}

std::string TrainReport::to_csv() const {
    std::string out = "epoch,train_loss,train_accuracy,validation_accuracy\n";
    for (std::size_t i = 0; i < epochs.size(); ++i) {
        out += std::to_string(i + 1);
        out += ",";
        out += format_double(epochs[i].train_loss);
        out += ",";
        out += format_double(epochs[i].train_accuracy);
        out += ",";
        out += format_double(epochs[i].validation_accuracy);
        out += "\n";
    }
    return out;
}

namespace {

json config_to_json_obj(const ModelConfig& c) {
    return json{{"input_dim", c.input_dim},
                {"hidden_dims", c.hidden_dims},
                {"output_dim", c.output_dim},
                {"hidden_activation", c.hidden_activation},
                {"dropout_rate", c.dropout_rate},
                {"learning_rate", c.learning_rate},
                {"adam_beta1", c.adam_beta1},
                {"adam_beta2", c.adam_beta2},
                {"adam_epsilon", c.adam_epsilon},
                {"batch_size", c.batch_size},
                {"epochs", c.epochs},
                {"seed", c.seed}};
}

ModelConfig config_from_json_obj(const json& obj, bool require_all) {
    static const std::set<std::string> known = {
        "input_dim", "hidden_dims", "output_dim", "hidden_activation",
        "dropout_rate", "learning_rate", "adam_beta1", "adam_beta2",
        "adam_epsilon", "batch_size", "epochs", "seed"};
    if (!obj.is_object()) throw input_error("model config must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key())) throw input_error("unknown model config key \"" + it.key() + "\"");
    }
    if (require_all) {
        for (const std::string& key : known) {
            if (!obj.contains(key)) throw input_error("model config missing key \"" + key + "\"");
        }
    }
    ModelConfig c;
    if (obj.contains("input_dim")) c.input_dim = obj["input_dim"].get<std::size_t>();
    if (obj.contains("hidden_dims")) c.hidden_dims = obj["hidden_dims"].get<std::vector<std::size_t>>();
    if (obj.contains("output_dim")) c.output_dim = obj["output_dim"].get<std::size_t>();
    if (obj.contains("hidden_activation")) c.hidden_activation = obj["hidden_activation"].get<std::string>();
    if (obj.contains("dropout_rate")) c.dropout_rate = obj["dropout_rate"].get<double>();
    if (obj.contains("learning_rate")) c.learning_rate = obj["learning_rate"].get<double>();
    if (obj.contains("adam_beta1")) c.adam_beta1 = obj["adam_beta1"].get<double>();
    if (obj.contains("adam_beta2")) c.adam_beta2 = obj["adam_beta2"].get<double>();
    if (obj.contains("adam_epsilon")) c.adam_epsilon = obj["adam_epsilon"].get<double>();
    if (obj.contains("batch_size")) c.batch_size = obj["batch_size"].get<std::size_t>();
    if (obj.contains("epochs")) c.epochs = obj["epochs"].get<std::size_t>();
    if (obj.contains("seed")) c.seed = obj["seed"].get<std::uint64_t>();
    return c;
}

} // namespace

std::string artifact_to_json(const ModelArtifact& artifact) {
    json layers = json::array();
    for (const LayerParams& layer : artifact.params.layers) {
        json w = json::array();
        for (std::size_t i = 0; i < layer.w.rows; ++i) {
            w.push_back(std::vector<double>(layer.w.row(i), layer.w.row(i) + layer.w.cols));
        }
        layers.push_back(json{{"w", std::move(w)}, {"b", layer.b}});
    }
    json labels = json::array();
    for (const ActivityLabel& label : artifact.label_map) {
        labels.push_back(json::array({label.app, label.activity}));
    }
    json doc{{"version", 1},
             {"config", config_to_json_obj(artifact.config)},
             {"label_map", std::move(labels)},
             {"scaler", json{{"mean", artifact.scaler.mean}, {"std", artifact.scaler.std}}},
             {"layers", std::move(layers)},
             {"threshold", artifact.threshold}};
    return doc.dump();
}

ModelArtifact artifact_from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw input_error("model artifact is not valid JSON");
    for (const char* key : {"version", "config", "label_map", "scaler", "layers", "threshold"}) {
        if (!doc.contains(key)) throw input_error("model artifact missing key \"" + std::string(key) + "\"");
    }
    if (doc["version"].get<int>() != 1) throw input_error("unsupported model artifact version");

    ModelArtifact artifact;
    artifact.config = config_from_json_obj(doc["config"], true);
    artifact.config.validate();

    for (const json& pair : doc["label_map"]) {
        if (!pair.is_array() || pair.size() != 2) throw input_error("label_map entries must be [app, activity]");
        ActivityLabel label{pair[0].get<std::string>(), pair[1].get<std::string>()};
        validate_label(label);
        artifact.label_map.push_back(std::move(label));
    }
    if (artifact.label_map.size() != artifact.config.output_dim) {
        throw input_error("label_map size does not match output_dim");
    }

    const json& scaler = doc["scaler"];
    const auto mean = scaler.at("mean").get<std::vector<double>>();
    const auto stdv = scaler.at("std").get<std::vector<double>>();
    if (mean.size() != kFeatureCount || stdv.size() != kFeatureCount) {
        throw input_error("scaler arrays must have 48 entries");
    }
    std::copy(mean.begin(), mean.end(), artifact.scaler.mean.begin());
    std::copy(stdv.begin(), stdv.end(), artifact.scaler.std.begin());
    for (double s : artifact.scaler.std) {
        if (s < 0.0) throw input_error("scaler std entries must be non-negative");
    }

    const std::vector<std::size_t> dims = artifact.config.layer_dims();
    const json& layers = doc["layers"];
    if (layers.size() != dims.size() - 1) throw input_error("layer count does not match config");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const json& w = layers[l].at("w");
        LayerParams layer;
        layer.w = Matrix(dims[l + 1], dims[l]);
        if (w.size() != dims[l + 1]) throw input_error("layer weight shape mismatch");
        for (std::size_t i = 0; i < dims[l + 1]; ++i) {
            const auto row = w[i].get<std::vector<double>>();
            if (row.size() != dims[l]) throw input_error("layer weight shape mismatch");
            std::copy(row.begin(), row.end(), layer.w.row(i));
        }
        layer.b = layers[l].at("b").get<std::vector<double>>();
        if (layer.b.size() != dims[l + 1]) throw input_error("layer bias shape mismatch");
        artifact.params.layers.push_back(std::move(layer));
    }

    artifact.threshold = doc["threshold"].get<double>();
    if (!(artifact.threshold >= 0.0 && artifact.threshold <= 1.0)) {
        throw input_error("threshold must lie in [0, 1]");
    }
    return artifact;
}

void save_artifact(const ModelArtifact& artifact, const std::string& path) {
    write_file_atomic(path, artifact_to_json(artifact) + "\n");
}

ModelArtifact load_artifact(const std::string& path) {
    return artifact_from_json(read_file(path));
}

ModelConfig model_config_from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw input_error("model config is not valid JSON");
    return config_from_json_obj(doc, false);
}

std::string model_config_to_json(const ModelConfig& config) {
    return config_to_json_obj(config).dump(2) + "\n";
}

} // namespace sideflow
