#include "drive/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace drive {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kBlobRadius = 4.0;
constexpr double kBlobNoise = 1.0;
constexpr double kMoonRadius = 4.0;
constexpr double kMoonNoise = 0.4;

struct RawSet {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
};

LabeledSet pack(RawSet raw, Split split, int classes, std::mt19937_64& rng) {
    std::vector<std::size_t> order(raw.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t n = raw.rows.size();
    const std::size_t d = raw.rows.empty() ? 0 : raw.rows[0].size();
    DenseArray features({n, d}, 0.0);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& src = raw.rows[order[i]];
        for (std::size_t j = 0; j < d; ++j) features.at(i, j) = src[j];
        labels[i] = raw.labels[order[i]];
    }
    return LabeledSet(std::move(features), std::move(labels), split, classes);
}

void rotate2(std::vector<double>& v, double angle_rad) {
    const double c = std::cos(angle_rad), s = std::sin(angle_rad);
    const double x = v[0], y = v[1];
    v[0] = c * x - s * y;
    v[1] = s * x + c * y;
}

std::vector<double> sample_around(const std::vector<double>& mean, double sigma, int dim,
                                  std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(dim), 0.0);
    for (int j = 0; j < dim; ++j) {
        x[static_cast<std::size_t>(j)] =
            (j < static_cast<int>(mean.size()) ? mean[static_cast<std::size_t>(j)] : 0.0) +
            sigma * normal(rng);
    }
    return x;
}

}  // namespace

std::string split_name(Split s) {
    switch (s) {
        case Split::source: return "source";
        case Split::target: return "target";
        case Split::broad: return "broad";
        case Split::eval: return "eval";
    }
    return "unknown";
}

LabeledSet::LabeledSet(DenseArray features, std::vector<int> labels, Split split, int num_classes)
    : features_(std::move(features)), labels_(std::move(labels)), split_(split), classes_(num_classes) {
    if (features_.rows() < 1) throw std::invalid_argument("LabeledSet: empty feature matrix");
    if (features_.rows() != labels_.size()) {
        throw std::invalid_argument("LabeledSet: " + std::to_string(features_.rows()) +
                                    " rows vs " + std::to_string(labels_.size()) + " labels");
    }
    if (classes_ < 2) throw std::invalid_argument("LabeledSet: need at least 2 classes");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] < 0 || labels_[i] >= classes_) {
            throw std::invalid_argument("LabeledSet: label " + std::to_string(labels_[i]) +
                                        " at row " + std::to_string(i) + " outside [0," +
                                        std::to_string(classes_) + ")");
        }
    }
}

const std::vector<int>& LabeledSet::labels() const {
    if (split_ == Split::target) {
        throw std::logic_error("LabeledSet: target labels are hidden; use evaluate_accuracy");
    }
    return labels_;
}

double LabeledSet::evaluate_accuracy(const std::vector<int>& predicted) const {
    if (predicted.size() != labels_.size()) {
        throw std::invalid_argument("evaluate_accuracy: " + std::to_string(predicted.size()) +
                                    " predictions for " + std::to_string(labels_.size()) + " samples");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (predicted[i] == labels_[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(labels_.size());
}

void LabeledSet::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    for (std::size_t j = 0; j < dim(); ++j) out << "f" << j << ",";
    out << "label\n";
    char buf[64];
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t j = 0; j < dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", features_.at(i, j));
            out << buf << ",";
        }
        out << labels_[i] << "\n";
    }
    if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

ShiftSpec ShiftSpec::rotated_gaussians5(std::uint64_t seed) {
    ShiftSpec spec;
    spec.family = Family::gaussian_blobs;
    spec.classes = 5;
    spec.dim = 8;
    spec.rotation_deg = 50.0;
    spec.noise_ratio = 1.3;
    spec.n_per_class = 400;
    spec.seed = seed;
    spec.set_translation_magnitude(1.5);
    return spec;
}

void ShiftSpec::set_translation_magnitude(double magnitude) {
    translation.assign(static_cast<std::size_t>(dim), 0.0);
    if (dim >= 2) {
        const double c = magnitude / std::sqrt(2.0);
        translation[0] = c;
        translation[1] = c;
    } else {
        translation[0] = magnitude;
    }
}

void ShiftSpec::validate() const {
    if (classes < 2) throw std::invalid_argument("ShiftSpec: classes must be >= 2");
    if (dim < 2) throw std::invalid_argument("ShiftSpec: dim must be >= 2");
    if (rotation_deg < 0.0 || rotation_deg > 180.0) {
        throw std::invalid_argument("ShiftSpec: rotation must lie in [0, 180] degrees");
    }
    if (!(noise_ratio > 0.0)) throw std::invalid_argument("ShiftSpec: noise_ratio must be > 0");
    if (n_per_class < 1) throw std::invalid_argument("ShiftSpec: n_per_class must be >= 1");
    if (!translation.empty() && translation.size() != static_cast<std::size_t>(dim)) {
        throw std::invalid_argument("ShiftSpec: translation has " + std::to_string(translation.size()) +
                                    " entries for dim " + std::to_string(dim));
    }
    if (family == Family::two_moons && classes != 2) {
        throw std::invalid_argument("ShiftSpec: two-moons requires exactly 2 classes");
    }
}

DomainTriple generate(const ShiftSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const double angle = spec.rotation_deg * kPi / 180.0;
    std::vector<double> shift = spec.translation;
    shift.resize(static_cast<std::size_t>(spec.dim), 0.0);

    RawSet source, target, broad;
    std::bernoulli_distribution coin(0.5);

    if (spec.family == ShiftSpec::Family::gaussian_blobs) {
        std::vector<std::vector<double>> src_means, tgt_means;
        for (int c = 0; c < spec.classes; ++c) {
            const double t = 2.0 * kPi * c / spec.classes;
            std::vector<double> m(static_cast<std::size_t>(spec.dim), 0.0);
            m[0] = kBlobRadius * std::cos(t);
            m[1] = kBlobRadius * std::sin(t);
            src_means.push_back(m);
            rotate2(m, angle);
            for (int j = 0; j < spec.dim; ++j) m[static_cast<std::size_t>(j)] += shift[static_cast<std::size_t>(j)];
            tgt_means.push_back(m);
        }
        const double src_sigma = kBlobNoise;
        const double tgt_sigma = kBlobNoise * spec.noise_ratio;
        for (int c = 0; c < spec.classes; ++c) {
            for (int i = 0; i < spec.n_per_class; ++i) {
                source.rows.push_back(sample_around(src_means[static_cast<std::size_t>(c)], src_sigma, spec.dim, rng));
                source.labels.push_back(c);
            }
        }
        for (int c = 0; c < spec.classes; ++c) {
            for (int i = 0; i < spec.n_per_class; ++i) {
                target.rows.push_back(sample_around(tgt_means[static_cast<std::size_t>(c)], tgt_sigma, spec.dim, rng));
                target.labels.push_back(c);
            }
        }
        // Broad split mixes both domains' parameters; it exists to pretrain the prior.
        for (int c = 0; c < spec.classes; ++c) {
            for (int i = 0; i < spec.n_per_class; ++i) {
                const bool from_target = coin(rng);
                broad.rows.push_back(sample_around(from_target ? tgt_means[static_cast<std::size_t>(c)]
                                                               : src_means[static_cast<std::size_t>(c)],
                                                   from_target ? tgt_sigma : src_sigma, spec.dim, rng));
                broad.labels.push_back(c);
            }
        }
    } else {
        std::uniform_real_distribution<double> arc(0.0, kPi);
        auto moon_point = [&](int label, bool shifted, double sigma) {
            const double t = arc(rng);
            std::vector<double> m(2, 0.0);
            if (label == 0) {
                m[0] = kMoonRadius * std::cos(t);
                m[1] = kMoonRadius * std::sin(t);
            } else {
                m[0] = kMoonRadius - kMoonRadius * std::cos(t);
                m[1] = kMoonRadius * 0.5 - kMoonRadius * std::sin(t);
            }
            if (shifted) {
                rotate2(m, angle);
                m[0] += shift[0];
                m[1] += shift.size() > 1 ? shift[1] : 0.0;
            }
            return sample_around(m, sigma, spec.dim, rng);
        };
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < spec.n_per_class; ++i) {
                source.rows.push_back(moon_point(c, false, kMoonNoise));
                source.labels.push_back(c);
            }
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < spec.n_per_class; ++i) {
                target.rows.push_back(moon_point(c, true, kMoonNoise * spec.noise_ratio));
                target.labels.push_back(c);
            }
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < spec.n_per_class; ++i) {
                const bool from_target = coin(rng);
                broad.rows.push_back(moon_point(c, from_target,
                                                from_target ? kMoonNoise * spec.noise_ratio : kMoonNoise));
                broad.labels.push_back(c);
            }
    }

    LabeledSet s = pack(std::move(source), Split::source, spec.classes, rng);
    LabeledSet t = pack(std::move(target), Split::target, spec.classes, rng);
    LabeledSet b = pack(std::move(broad), Split::broad, spec.classes, rng);
    return DomainTriple{std::move(s), std::move(t), std::move(b)};
}

LabeledSet load_csv(const std::string& path, Split split, int expected_classes) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: " + path + " is empty");
    std::size_t dim = 0;
    {
        std::stringstream header(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(header, field, ',')) fields.push_back(field);
        if (fields.size() < 2 || fields.back() != "label") {
            throw std::runtime_error("load_csv: " + path + " header must end with 'label'");
        }
        dim = fields.size() - 1;
    }

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    int max_label = -1;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<double> row;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != dim + 1) {
            throw std::runtime_error("load_csv: line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(dim + 1) + " fields, got " +
                                     std::to_string(fields.size()));
        }
        try {
            std::size_t pos = 0;
            for (std::size_t j = 0; j < dim; ++j) {
                row.push_back(std::stod(fields[j], &pos));
                if (pos != fields[j].size()) throw std::invalid_argument(fields[j]);
            }
            std::size_t lpos = 0;
            const int label = std::stoi(fields[dim], &lpos);
            if (lpos != fields[dim].size()) throw std::invalid_argument(fields[dim]);
            if (label < 0 || (expected_classes > 0 && label >= expected_classes)) {
                throw std::runtime_error("load_csv: line " + std::to_string(line_no) + ": label " +
                                         std::to_string(label) + " out of range");
            }
            labels.push_back(label);
            max_label = std::max(max_label, label);
        } catch (const std::runtime_error&) {
            throw;
        } catch (const std::exception&) {
            throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                                     ": malformed field in '" + line + "'");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("load_csv: " + path + " has no data rows");

    DenseArray features({rows.size(), dim}, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < dim; ++j) features.at(i, j) = rows[i][j];
    const int classes = expected_classes > 0 ? expected_classes : std::max(max_label + 1, 2);
    return LabeledSet(std::move(features), std::move(labels), split, classes);
}

}  // namespace drive
