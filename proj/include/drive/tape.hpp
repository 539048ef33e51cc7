#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "drive/dense.hpp"

namespace drive {

class Tape;

// Handle to a node on a Tape.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Gradients of a scalar root with respect to every leaf on the tape.
// Leaves that do not reach the root map to exact zeros.
class GradMap {
  public:
    const DenseArray& at(Var leaf) const;
    bool contains(Var leaf) const { return grads_.count(leaf.id) > 0; }
    std::size_t size() const { return grads_.size(); }

  private:
    friend class Tape;
    std::unordered_map<int, DenseArray> grads_;
};

// Reverse-mode tape. Nodes are recorded in evaluation order; backward replays
// closures in reverse creation order, so accumulation order is fixed and runs
// are bitwise deterministic. A tape is never shared across threads.
class Tape {
  public:
    // Leaf: gradient is reported by backward(). Constant: recorded value with
    // no gradient path out of it (how pseudo-labels are gradient-blocked).
    Var leaf(DenseArray v);
    Var constant(DenseArray v);

    Var matmul(Var a, Var b);
    Var transpose(Var a);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var add_rowvec(Var m, Var r);
    Var add_scalar(Var a, double s);
    Var scale(Var a, double s);
    Var tanh(Var a);
    Var exp(Var a);
    Var log(Var a);          // log(max(x, kLogFloor)); zero gradient below the floor
    Var softmax_rows(Var a);
    Var row_sum(Var a);
    Var col_sum(Var a);
    Var sum_all(Var a);      // reduction to shape {1}
    Var row_normalize(Var a);

    const DenseArray& value(Var v) const;
    double scalar_value(Var v) const;

    // Gradient of a scalar root with respect to every leaf.
    GradMap backward(Var root);

    std::size_t node_count() const { return nodes_.size(); }
    const std::vector<int>& leaf_ids() const { return leaf_ids_; }

  private:
    struct Node {
        DenseArray value;
        DenseArray grad;
        std::function<void(std::vector<Node>&, const DenseArray&)> back;  // pulls grad into parents
        bool is_leaf = false;
    };

    Var push(DenseArray value, std::function<void(std::vector<Node>&, const DenseArray&)> back);
    const Node& node(Var v) const;

    std::vector<Node> nodes_;
    std::vector<int> leaf_ids_;
};

// Max over coordinates of |analytic - numeric| / max(1e-12, |analytic| + |numeric|),
// with numeric gradients from central differences of the traced function.
using ScalarGraphFn = std::function<Var(Tape&, Var)>;
double grad_check(const ScalarGraphFn& f, const DenseArray& point, double step);

}  // namespace drive
