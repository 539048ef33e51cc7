#include "drive/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace drive {

namespace {

DenseArray one_hot_rows(const std::vector<int>& labels, std::size_t classes) {
    DenseArray out({labels.size(), classes}, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return out;
}

DenseArray take_rows(const DenseArray& m, const std::vector<std::size_t>& idx) {
    DenseArray out({idx.size(), m.cols()}, 0.0);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out.at(i, j) = m.at(idx[i], j);
    return out;
}

std::vector<int> argmax_rows(const DenseArray& probs) {
    std::vector<int> labels(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < probs.cols(); ++j) {
            if (probs.at(i, j) > probs.at(i, best)) best = j;
        }
        labels[i] = static_cast<int>(best);
    }
    return labels;
}

// Mean cross-entropy of softmax probs against integer labels.
Var ce_loss(Tape& tape, Var probs, const std::vector<int>& labels, std::size_t classes) {
    Var mask = tape.constant(one_hot_rows(labels, classes));
    Var picked = tape.mul(mask, tape.log(probs));
    return tape.scale(tape.sum_all(picked), -1.0 / static_cast<double>(labels.size()));
}

}  // namespace

DenseNet DenseNet::init(const std::vector<std::size_t>& widths, std::mt19937_64& rng) {
    if (widths.size() < 2) throw std::invalid_argument("DenseNet: need at least input and output widths");
    DenseNet net;
    net.widths = widths;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const double s = std::sqrt(1.0 / static_cast<double>(widths[l]));
        DenseArray w({widths[l], widths[l + 1]}, 0.0);
        for (double& v : w.data) v = s * normal(rng);
        net.weights.push_back(std::move(w));
        net.biases.push_back(DenseArray({1, widths[l + 1]}, 0.0));
    }
    return net;
}

DenseNet DenseNet::zeros(const std::vector<std::size_t>& widths) {
    if (widths.size() < 2) throw std::invalid_argument("DenseNet: need at least input and output widths");
    DenseNet net;
    net.widths = widths;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        net.weights.push_back(DenseArray({widths[l], widths[l + 1]}, 0.0));
        net.biases.push_back(DenseArray({1, widths[l + 1]}, 0.0));
    }
    return net;
}

std::size_t DenseNet::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

std::uint64_t DenseNet::param_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t l = 0; l < layer_count(); ++l) {
        h = hash_array(h, weights[l]);
        h = hash_array(h, biases[l]);
    }
    return h;
}

DenseNet::Bound DenseNet::bind(Tape& tape) const {
    Bound b;
    b.trainable = true;
    for (std::size_t l = 0; l < layer_count(); ++l) {
        b.w.push_back(tape.leaf(weights[l]));
        b.b.push_back(tape.leaf(biases[l]));
    }
    return b;
}

DenseNet::Bound DenseNet::bind_const(Tape& tape) const {
    Bound b;
    b.trainable = false;
    for (std::size_t l = 0; l < layer_count(); ++l) {
        b.w.push_back(tape.constant(weights[l]));
        b.b.push_back(tape.constant(biases[l]));
    }
    return b;
}

Var DenseNet::forward_logits(Tape& tape, const Bound& bound, Var x) {
    Var h = x;
    const std::size_t L = bound.w.size();
    for (std::size_t l = 0; l < L; ++l) {
        h = tape.add_rowvec(tape.matmul(h, bound.w[l]), bound.b[l]);
        if (l + 1 < L) h = tape.tanh(h);
    }
    return h;
}

DenseArray DenseNet::logits(const DenseArray& x) const {
    Tape tape;
    Bound b = bind_const(tape);
    return tape.value(forward_logits(tape, b, tape.constant(x)));
}

DenseArray DenseNet::predict_probs(const DenseArray& x) const { return softmax_rows(logits(x)); }

std::vector<int> DenseNet::predict_labels(const DenseArray& x) const {
    return argmax_rows(predict_probs(x));
}

void DenseNet::apply_gradients(const Bound& bound, const GradMap& grads, double lr) {
    if (frozen) throw std::logic_error("DenseNet: parameters are frozen");
    if (!bound.trainable) throw std::logic_error("DenseNet: bound was created as constant");
    for (std::size_t l = 0; l < layer_count(); ++l) {
        const DenseArray& gw = grads.at(bound.w[l]);
        const DenseArray& gb = grads.at(bound.b[l]);
        for (std::size_t i = 0; i < weights[l].size(); ++i) weights[l][i] -= lr * gw[i];
        for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] -= lr * gb[i];
    }
}

std::pair<DenseArray, DenseArray> classifier_predict(const DenseNet& net, const DenseArray& x) {
    if (x.cols() != net.input_dim()) {
        throw std::invalid_argument("classifier_predict: input width " + std::to_string(x.cols()) +
                                    " does not match net input " + std::to_string(net.input_dim()));
    }
    DenseArray l = net.logits(x);
    return {l, softmax_rows(l)};
}

PriorModel PriorModel::init(std::size_t input_dim, std::size_t hidden, std::size_t feature_dim,
                            std::size_t classes, double temperature, std::mt19937_64& rng) {
    if (temperature <= 0.0) throw std::invalid_argument("PriorModel: temperature must be positive");
    PriorModel p;
    p.encoder = DenseNet::init({input_dim, hidden, feature_dim}, rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    p.class_embeddings = DenseArray({classes, feature_dim}, 0.0);
    const double s = std::sqrt(1.0 / static_cast<double>(feature_dim));
    for (double& v : p.class_embeddings.data) v = s * normal(rng);
    p.prompt_context = DenseArray({1, feature_dim}, 0.0);
    p.temperature = temperature;
    return p;
}

std::uint64_t PriorModel::backbone_hash() const {
    std::uint64_t h = encoder.param_hash();
    return hash_array(h, class_embeddings);
}

PriorModel::Bound PriorModel::bind(Tape& tape, bool train_backbone, bool train_prompt) const {
    Bound b;
    b.backbone_trainable = train_backbone;
    b.prompt_trainable = train_prompt;
    b.enc = train_backbone ? encoder.bind(tape) : encoder.bind_const(tape);
    b.emb = train_backbone ? tape.leaf(class_embeddings) : tape.constant(class_embeddings);
    b.prompt = train_prompt ? tape.leaf(prompt_context) : tape.constant(prompt_context);
    return b;
}

Var PriorModel::forward_probs(Tape& tape, const Bound& bound, Var x, double temperature) {
    Var feat = DenseNet::forward_logits(tape, bound.enc, x);       // n x k
    Var shifted = tape.add_rowvec(bound.emb, bound.prompt);        // C x k
    Var unit = tape.row_normalize(shifted);
    Var scores = tape.scale(tape.matmul(feat, tape.transpose(unit)), 1.0 / temperature);
    return tape.softmax_rows(scores);
}

DenseArray PriorModel::predict_probs(const DenseArray& x) const {
    return predict_probs(x, prompt_context);
}

DenseArray PriorModel::predict_probs(const DenseArray& x, const DenseArray& prompt_override) const {
    if (x.cols() != encoder.input_dim()) {
        throw std::invalid_argument("prior_predict: input width " + std::to_string(x.cols()) +
                                    " does not match encoder input " +
                                    std::to_string(encoder.input_dim()));
    }
    if (prompt_override.size() != feature_dim()) {
        throw std::invalid_argument("prior_predict: prompt width " +
                                    std::to_string(prompt_override.size()) +
                                    " does not match feature dim " + std::to_string(feature_dim()));
    }
    Tape tape;
    Bound b;
    b.enc = encoder.bind_const(tape);
    b.emb = tape.constant(class_embeddings);
    b.prompt = tape.constant(prompt_override);
    return tape.value(forward_probs(tape, b, tape.constant(x), temperature));
}

std::vector<int> PriorModel::predict_labels(const DenseArray& x) const {
    return argmax_rows(predict_probs(x));
}

void PriorModel::apply_backbone_gradients(const Bound& bound, const GradMap& grads, double lr) {
    if (backbone_frozen) throw std::logic_error("PriorModel: backbone is frozen");
    if (!bound.backbone_trainable) throw std::logic_error("PriorModel: backbone bound as constant");
    encoder.apply_gradients(bound.enc, grads, lr);
    const DenseArray& ge = grads.at(bound.emb);
    for (std::size_t i = 0; i < class_embeddings.size(); ++i) class_embeddings[i] -= lr * ge[i];
}

void PriorModel::apply_prompt_gradient(const Bound& bound, const GradMap& grads, double lr) {
    if (!bound.prompt_trainable) throw std::logic_error("PriorModel: prompt bound as constant");
    const DenseArray& gp = grads.at(bound.prompt);
    for (std::size_t i = 0; i < prompt_context.size(); ++i) prompt_context[i] -= lr * gp[i];
}

DenseArray prior_predict(const PriorModel& prior, const DenseArray& x, const DenseArray& prompt) {
    return prior.predict_probs(x, prompt);
}

double pretrain_source(DenseNet& net, const LabeledSet& source, int epochs, double lr,
                       std::uint64_t seed, std::size_t batch_size) {
    if (source.size() == 0) throw std::invalid_argument("pretrain_source: empty data");
    if (source.dim() != net.input_dim()) {
        throw std::invalid_argument("pretrain_source: data dim " + std::to_string(source.dim()) +
                                    " vs net input " + std::to_string(net.input_dim()));
    }
    std::mt19937_64 rng(seed);
    const std::vector<int>& y = source.labels();
    std::vector<std::size_t> order(source.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
            std::vector<int> yb;
            for (std::size_t i : idx) yb.push_back(y[i]);

            Tape tape;
            DenseNet::Bound bound = net.bind(tape);
            Var x = tape.constant(take_rows(source.features(), idx));
            Var probs = tape.softmax_rows(DenseNet::forward_logits(tape, bound, x));
            Var loss = ce_loss(tape, probs, yb, static_cast<std::size_t>(source.num_classes()));
            GradMap grads = tape.backward(loss);
            net.apply_gradients(bound, grads, lr);
        }
    }
    return source.evaluate_accuracy(net.predict_labels(source.features()));
}

double pretrain_prior(PriorModel& prior, const LabeledSet& broad, int epochs, double lr,
                      std::uint64_t seed, std::size_t batch_size) {
    if (broad.size() == 0) throw std::invalid_argument("pretrain_prior: empty data");
    if (prior.backbone_frozen) throw std::logic_error("pretrain_prior: backbone already frozen");
    std::mt19937_64 rng(seed);
    const std::vector<int>& y = broad.labels();
    std::vector<std::size_t> order(broad.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
            std::vector<int> yb;
            for (std::size_t i : idx) yb.push_back(y[i]);

            // Prompt context stays at zero during pretraining.
            Tape tape;
            PriorModel::Bound bound = prior.bind(tape, /*train_backbone=*/true, /*train_prompt=*/false);
            Var x = tape.constant(take_rows(broad.features(), idx));
            Var probs = PriorModel::forward_probs(tape, bound, x, prior.temperature);
            Var loss = ce_loss(tape, probs, yb, static_cast<std::size_t>(broad.num_classes()));
            GradMap grads = tape.backward(loss);
            prior.apply_backbone_gradients(bound, grads, lr);
        }
    }
    prior.encoder.frozen = true;
    prior.backbone_frozen = true;
    return broad.evaluate_accuracy(prior.predict_labels(broad.features()));
}

std::uint64_t hash_bytes(std::uint64_t seed, const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t hash_array(std::uint64_t seed, const DenseArray& a) {
    return hash_bytes(seed, a.data.data(), a.data.size() * sizeof(double));
}

}  // namespace drive
