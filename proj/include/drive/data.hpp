#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drive/dense.hpp"

namespace drive {

enum class Split { source, target, broad, eval };

std::string split_name(Split s);

// Feature matrix plus integer labels. Labels of the target split are hidden:
// they can only be used through evaluate_accuracy.
class LabeledSet {
  public:
    LabeledSet(DenseArray features, std::vector<int> labels, Split split, int num_classes);

    std::size_t size() const { return features_.rows(); }
    std::size_t dim() const { return features_.cols(); }
    int num_classes() const { return classes_; }
    Split split() const { return split_; }
    const DenseArray& features() const { return features_; }

    // Throws for the target split; target labels are evaluation-only.
    const std::vector<int>& labels() const;
    double evaluate_accuracy(const std::vector<int>& predicted) const;

    void write_csv(const std::string& path) const;

  private:
    DenseArray features_;
    std::vector<int> labels_;
    Split split_;
    int classes_;
};

// Synthetic covariate-shift benchmark: the target domain re-draws the source
// generative parameters under a rotation, translation and noise rescale.
struct ShiftSpec {
    enum class Family { gaussian_blobs, two_moons };

    Family family = Family::gaussian_blobs;
    int classes = 5;
    int dim = 8;
    double rotation_deg = 50.0;
    std::vector<double> translation;  // dim entries; empty means zero
    double noise_ratio = 1.3;
    int n_per_class = 400;
    std::uint64_t seed = 0;

    static ShiftSpec rotated_gaussians5(std::uint64_t seed);
    void set_translation_magnitude(double magnitude);
    void validate() const;
};

struct DomainTriple {
    LabeledSet source;
    LabeledSet target;
    LabeledSet broad;
};

DomainTriple generate(const ShiftSpec& spec);

LabeledSet load_csv(const std::string& path, Split split, int expected_classes = 0);

}  // namespace drive
