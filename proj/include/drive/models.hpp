#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "drive/data.hpp"
#include "drive/dense.hpp"
#include "drive/tape.hpp"

namespace drive {

// Feed-forward classifier: tanh hidden layers, softmax head. The same
// parameter set serves the clean and perturbed evaluation paths (weight
// tying), so there is exactly one copy of the target model's state.
struct DenseNet {
    std::vector<std::size_t> widths;  // input, hidden..., output
    std::vector<DenseArray> weights;  // widths[l] x widths[l+1]
    std::vector<DenseArray> biases;   // 1 x widths[l+1]
    bool frozen = false;

    static DenseNet init(const std::vector<std::size_t>& widths, std::mt19937_64& rng);
    static DenseNet zeros(const std::vector<std::size_t>& widths);

    std::size_t layer_count() const { return weights.size(); }
    std::size_t input_dim() const { return widths.front(); }
    std::size_t output_dim() const { return widths.back(); }
    std::size_t param_count() const;
    std::uint64_t param_hash() const;

    struct Bound {
        std::vector<Var> w;
        std::vector<Var> b;
        bool trainable = false;
    };
    Bound bind(Tape& tape) const;        // parameters as leaves
    Bound bind_const(Tape& tape) const;  // parameters as constants

    static Var forward_logits(Tape& tape, const Bound& bound, Var x);

    DenseArray logits(const DenseArray& x) const;
    DenseArray predict_probs(const DenseArray& x) const;
    std::vector<int> predict_labels(const DenseArray& x) const;

    // One gradient-descent step; throws if the net is frozen.
    void apply_gradients(const Bound& bound, const GradMap& grads, double lr);
};

// (logits, softmax probabilities) for each input row.
std::pair<DenseArray, DenseArray> classifier_predict(const DenseNet& net, const DenseArray& x);

// Frozen feature encoder plus class embeddings, modulated by a learnable
// prompt-context vector. Scores are cosine-style: the shifted embeddings
// e_c + v are unit-normalized before the inner product with the feature.
struct PriorModel {
    DenseNet encoder;           // feature = encoder logits, d -> ... -> k
    DenseArray class_embeddings;  // C x k
    DenseArray prompt_context;    // 1 x k, the only trainable part after pretraining
    double temperature = 0.5;
    bool backbone_frozen = false;

    static PriorModel init(std::size_t input_dim, std::size_t hidden, std::size_t feature_dim,
                           std::size_t classes, double temperature, std::mt19937_64& rng);

    std::size_t feature_dim() const { return encoder.output_dim(); }
    std::size_t num_classes() const { return class_embeddings.rows(); }
    std::uint64_t backbone_hash() const;

    struct Bound {
        DenseNet::Bound enc;
        Var emb;
        Var prompt;
        bool backbone_trainable = false;
        bool prompt_trainable = false;
    };
    Bound bind(Tape& tape, bool train_backbone, bool train_prompt) const;
    static Var forward_probs(Tape& tape, const Bound& bound, Var x, double temperature);

    DenseArray predict_probs(const DenseArray& x) const;
    DenseArray predict_probs(const DenseArray& x, const DenseArray& prompt_override) const;
    std::vector<int> predict_labels(const DenseArray& x) const;

    void apply_backbone_gradients(const Bound& bound, const GradMap& grads, double lr);
    void apply_prompt_gradient(const Bound& bound, const GradMap& grads, double lr);
};

DenseArray prior_predict(const PriorModel& prior, const DenseArray& x, const DenseArray& prompt);

// Cross-entropy pretraining. Both are mini-batch gradient descent with a
// seeded shuffle; same seed gives bitwise-identical parameters.
double pretrain_source(DenseNet& net, const LabeledSet& source, int epochs, double lr,
                       std::uint64_t seed, std::size_t batch_size = 64);
double pretrain_prior(PriorModel& prior, const LabeledSet& broad, int epochs, double lr,
                      std::uint64_t seed, std::size_t batch_size = 64);

// Self-describing checkpoint: named tensors with shapes, frozen flags and
// 64-bit little-endian payloads. Round-trips bit-exactly.
struct NamedTensor {
    std::string name;
    DenseArray value;
    bool frozen = false;
};

void save_tensors(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_tensors(const std::string& path);

void save_dense_net(const std::string& path, const DenseNet& net);
DenseNet load_dense_net(const std::string& path);
void save_prior(const std::string& path, const PriorModel& prior);
PriorModel load_prior(const std::string& path);

std::uint64_t hash_bytes(std::uint64_t seed, const void* data, std::size_t len);
std::uint64_t hash_array(std::uint64_t seed, const DenseArray& a);

}  // namespace drive
