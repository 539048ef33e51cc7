#include "drive/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drive {

const DenseArray& GradMap::at(Var leaf) const {
    auto it = grads_.find(leaf.id);
    if (it == grads_.end()) {
        throw std::invalid_argument("GradMap: var " + std::to_string(leaf.id) +
                                    " is not a leaf of this tape");
    }
    return it->second;
}

Var Tape::push(DenseArray value, std::function<void(std::vector<Node>&, const DenseArray&)> back) {
    Node n;
    n.grad = DenseArray::zeros_like(value);
    n.value = std::move(value);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(Var v) const {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
        throw std::invalid_argument("Tape: var " + std::to_string(v.id) + " is not on this tape");
    }
    return nodes_[static_cast<std::size_t>(v.id)];
}

Var Tape::leaf(DenseArray v) {
    Var out = push(std::move(v), nullptr);
    nodes_[static_cast<std::size_t>(out.id)].is_leaf = true;
    leaf_ids_.push_back(out.id);
    return out;
}

Var Tape::constant(DenseArray v) { return push(std::move(v), nullptr); }

const DenseArray& Tape::value(Var v) const { return node(v).value; }

double Tape::scalar_value(Var v) const {
    const DenseArray& a = node(v).value;
    if (a.size() != 1) {
        throw std::invalid_argument("Tape::scalar_value: shape " + a.shape_str() + " is not scalar");
    }
    return a[0];
}

Var Tape::matmul(Var a, Var b) {
    DenseArray out = drive::matmul(value(a), value(b));
    const int ia = a.id, ib = b.id;
    return push(std::move(out), [ia, ib](std::vector<Node>& ns, const DenseArray& g) {
        const DenseArray& av = ns[ia].value;
        const DenseArray& bv = ns[ib].value;
        DenseArray ga = drive::matmul(g, drive::transpose(bv));
        DenseArray gb = drive::matmul(drive::transpose(av), g);
        ns[ia].grad = drive::add(ns[ia].grad, ga);
        ns[ib].grad = drive::add(ns[ib].grad, gb);
    });
}

Var Tape::transpose(Var a) {
    DenseArray out = drive::transpose(value(a));
    const int ia = a.id;
    return push(std::move(out), [ia](std::vector<Node>& ns, const DenseArray& g) {
        ns[ia].grad = drive::add(ns[ia].grad, drive::transpose(g));
    });
}

Var Tape::add(Var a, Var b) {
    DenseArray out = drive::add(value(a), value(b));
    const int ia = a.id, ib = b.id;
    return push(std::move(out), [ia, ib](std::vector<Node>& ns, const DenseArray& g) {
        ns[ia].grad = drive::add(ns[ia].grad, g);
        ns[ib].grad = drive::add(ns[ib].grad, g);
    });
}

Var Tape::sub(Var a, Var b) {
    DenseArray out = drive::sub(value(a), value(b));
    const int ia = a.id, ib = b.id;
    return push(std::move(out), [ia, ib](std::vector<Node>& ns, const DenseArray& g) {
        ns[ia].grad = drive::add(ns[ia].grad, g);
        ns[ib].grad = drive::sub(ns[ib].grad, g);
    });
}

Var Tape::mul(Var a, Var b) {
    DenseArray out = drive::mul(value(a), value(b));
    const int ia = a.id, ib = b.id;
    return push(std::move(out), [ia, ib](std::vector<Node>& ns, const DenseArray& g) {
        ns[ia].grad = drive::add(ns[ia].grad, drive::mul(g, ns[ib].value));
        ns[ib].grad = drive::add(ns[ib].grad, drive::mul(g, ns[ia].value));
    });
}

Var Tape::add_rowvec(Var m, Var r) {
    DenseArray out = drive::add_rowvec(value(m), value(r));
    const int im = m.id, ir = r.id;
    return push(std::move(out), [im, ir](std::vector<Node>& ns, const DenseArray& g) {
        ns[im].grad = drive::add(ns[im].grad, g);
        DenseArray gr = drive::col_sum(g);
        DenseArray& acc = ns[ir].grad;
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += gr[j];
    });
}

Var Tape::add_scalar(Var a, double s) {
    DenseArray out = drive::add_scalar(value(a), s);
    const int ia = a.id;
    return push(std::move(out), [ia](std::vector<Node>& ns, const DenseArray& g) {
        ns[ia].grad = drive::add(ns[ia].grad, g);
    });
}

Var Tape::scale(Var a, double s) {
    DenseArray out = drive::scale(value(a), s);
    const int ia = a.id;
    return push(std::move(out), [ia, s](std::vector<Node>& ns, const DenseArray& g) {
        ns[ia].grad = drive::add(ns[ia].grad, drive::scale(g, s));
    });
}

Var Tape::tanh(Var a) {
    DenseArray out = drive::tanh_ew(value(a));
    const int ia = a.id;
    Var o = push(std::move(out), nullptr);
    const int io = o.id;
    nodes_[static_cast<std::size_t>(io)].back = [ia, io](std::vector<Node>& ns, const DenseArray& g) {
        DenseArray& acc = ns[ia].grad;
        const DenseArray& y = ns[io].value;
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i] * (1.0 - y[i] * y[i]);
    };
    return o;
}

Var Tape::exp(Var a) {
    DenseArray out = drive::exp_ew(value(a));
    const int ia = a.id;
    Var o = push(std::move(out), nullptr);
    const int io = o.id;
    nodes_[static_cast<std::size_t>(io)].back = [ia, io](std::vector<Node>& ns, const DenseArray& g) {
        DenseArray& acc = ns[ia].grad;
        const DenseArray& y = ns[io].value;
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i] * y[i];
    };
    return o;
}

Var Tape::log(Var a) {
    DenseArray out = drive::log_ew(value(a));
    const int ia = a.id;
    return push(std::move(out), [ia](std::vector<Node>& ns, const DenseArray& g) {
        DenseArray& acc = ns[ia].grad;
        const DenseArray& x = ns[ia].value;
        for (std::size_t i = 0; i < acc.size(); ++i) {
            if (x[i] > kLogFloor) acc[i] += g[i] / x[i];
        }
    });
}

Var Tape::softmax_rows(Var a) {
    DenseArray out = drive::softmax_rows(value(a));
    const int ia = a.id;
    Var o = push(std::move(out), nullptr);
    const int io = o.id;
    nodes_[static_cast<std::size_t>(io)].back = [ia, io](std::vector<Node>& ns, const DenseArray& g) {
        const DenseArray& y = ns[io].value;
        DenseArray& acc = ns[ia].grad;
        const std::size_t n = y.rows(), c = y.cols();
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * y[i * c + j];
            for (std::size_t j = 0; j < c; ++j) {
                acc[i * c + j] += y[i * c + j] * (g[i * c + j] - dot);
            }
        }
    };
    return o;
}

Var Tape::row_sum(Var a) {
    DenseArray out = drive::row_sum(value(a));
    const int ia = a.id;
    return push(std::move(out), [ia](std::vector<Node>& ns, const DenseArray& g) {
        DenseArray& acc = ns[ia].grad;
        const std::size_t n = acc.rows(), c = acc.cols();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < c; ++j) acc[i * c + j] += g[i];
    });
}

Var Tape::col_sum(Var a) {
    DenseArray out = drive::col_sum(value(a));
    const int ia = a.id;
    return push(std::move(out), [ia](std::vector<Node>& ns, const DenseArray& g) {
        DenseArray& acc = ns[ia].grad;
        const std::size_t n = acc.rows(), c = acc.cols();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < c; ++j) acc[i * c + j] += g[j];
    });
}

Var Tape::sum_all(Var a) {
    DenseArray out = DenseArray::scalar(drive::sum_all(value(a)));
    const int ia = a.id;
    return push(std::move(out), [ia](std::vector<Node>& ns, const DenseArray& g) {
        DenseArray& acc = ns[ia].grad;
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[0];
    });
}

Var Tape::row_normalize(Var a) {
    DenseArray out = drive::row_normalize(value(a));
    const int ia = a.id;
    return push(std::move(out), [ia](std::vector<Node>& ns, const DenseArray& g) {
        const DenseArray& x = ns[ia].value;
        DenseArray& acc = ns[ia].grad;
        const std::size_t n = x.rows(), c = x.cols();
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < c; ++j) s += x[i * c + j] * x[i * c + j];
            const double nrm = std::sqrt(s);
            if (nrm <= kLogFloor) {
                // below the floor the norm is treated as a constant
                for (std::size_t j = 0; j < c; ++j) acc[i * c + j] += g[i * c + j] / kLogFloor;
                continue;
            }
            double xg = 0.0;
            for (std::size_t j = 0; j < c; ++j) xg += x[i * c + j] * g[i * c + j];
            const double n3 = nrm * nrm * nrm;
            for (std::size_t j = 0; j < c; ++j) {
                acc[i * c + j] += g[i * c + j] / nrm - x[i * c + j] * xg / n3;
            }
        }
    });
}

GradMap Tape::backward(Var root) {
    const Node& r = node(root);
    if (r.value.size() != 1) {
        throw std::invalid_argument("backward: root has shape " + r.value.shape_str() +
                                    ", expected a scalar");
    }
    for (Node& n : nodes_) {
        std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
    }
    nodes_[static_cast<std::size_t>(root.id)].grad[0] = 1.0;
    for (int id = root.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.back) n.back(nodes_, n.grad);
    }
    GradMap out;
    for (int id : leaf_ids_) {
        out.grads_.emplace(id, nodes_[static_cast<std::size_t>(id)].grad);
    }
    return out;
}

double grad_check(const ScalarGraphFn& f, const DenseArray& point, double step) {
    Tape tape;
    Var x = tape.leaf(point);
    Var root = f(tape, x);
    if (!tape.value(root).all_finite()) {
        throw std::runtime_error("grad_check: non-finite evaluation at the base point");
    }
    GradMap grads = tape.backward(root);
    const DenseArray& analytic = grads.at(x);

    auto eval = [&](const DenseArray& p) {
        Tape t;
        Var v = t.leaf(p);
        double val = t.scalar_value(f(t, v));
        if (!std::isfinite(val)) {
            throw std::runtime_error("grad_check: non-finite evaluation at a probe point");
        }
        return val;
    };

    double worst = 0.0;
    DenseArray probe = point;
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + step;
        const double fp = eval(probe);
        probe[i] = orig - step;
        const double fm = eval(probe);
        probe[i] = orig;
        const double numeric = (fp - fm) / (2.0 * step);
        const double denom = std::max(1e-12, std::abs(analytic[i]) + std::abs(numeric));
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

}  // namespace drive
