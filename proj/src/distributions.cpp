#include "drive/distributions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace drive {

namespace {

constexpr double kSimplexTol = 1e-9;

}  // namespace

ProbVector::ProbVector(std::vector<double> probs) : p(std::move(probs)) {
    if (p.size() < 2) {
        throw std::invalid_argument("ProbVector: need at least 2 classes, got " +
                                    std::to_string(p.size()));
    }
    double s = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument("ProbVector: negative or NaN entry " + std::to_string(v));
        }
        s += v;
    }
    if (std::abs(s - 1.0) > kSimplexTol) {
        throw std::invalid_argument("ProbVector: entries sum to " + std::to_string(s));
    }
}

std::size_t ProbVector::argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i] > p[best]) best = i;
    }
    return best;
}

double ProbVector::max_prob() const { return p[argmax()]; }

BatchDistributionPair::BatchDistributionPair(DenseArray p, DenseArray q)
    : P(std::move(p)), Q(std::move(q)) {
    if (P.rows() != Q.rows() || P.cols() != Q.cols()) {
        throw std::invalid_argument("BatchDistributionPair: shape mismatch " + P.shape_str() +
                                    " vs " + Q.shape_str());
    }
    if (P.rows() < 1) throw std::invalid_argument("BatchDistributionPair: empty batch");
    validate_rows_stochastic(P, "P");
    validate_rows_stochastic(Q, "Q");
}

void validate_rows_stochastic(const DenseArray& m, const char* what) {
    const std::size_t n = m.rows(), c = m.cols();
    if (c < 2) {
        throw std::invalid_argument(std::string(what) + ": need at least 2 classes, got " +
                                    std::to_string(c));
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            const double v = m.at(i, j);
            if (!(v >= 0.0)) {
                throw std::invalid_argument(std::string(what) + ": row " + std::to_string(i) +
                                            " has entry " + std::to_string(v));
            }
            s += v;
        }
        if (std::abs(s - 1.0) > kSimplexTol) {
            throw std::invalid_argument(std::string(what) + ": row " + std::to_string(i) +
                                        " sums to " + std::to_string(s));
        }
    }
}

double entropy(const ProbVector& p) {
    double h = 0.0;
    for (double v : p.p) {
        if (v > 0.0) h -= v * std::log(std::max(v, kLogFloor));
    }
    return h;
}

double kl(const ProbVector& p, const ProbVector& q) {
    if (p.classes() != q.classes()) {
        throw std::invalid_argument("kl: dimension mismatch " + std::to_string(p.classes()) +
                                    " vs " + std::to_string(q.classes()));
    }
    double d = 0.0;
    for (std::size_t i = 0; i < p.classes(); ++i) {
        if (p[i] > 0.0) d += p[i] * (std::log(p[i]) - std::log(std::max(q[i], kLogFloor)));
    }
    return d;
}

double js(const ProbVector& p, const ProbVector& q) {
    if (p.classes() != q.classes()) {
        throw std::invalid_argument("js: dimension mismatch");
    }
    std::vector<double> m(p.classes());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
    ProbVector mid(std::move(m));
    return 0.5 * kl(p, mid) + 0.5 * kl(q, mid);
}

Var mi_var(Tape& tape, Var P, Var Q) {
    const DenseArray& pv = tape.value(P);
    if (pv.rows() < 1) throw std::invalid_argument("mi_var: empty batch");
    if (pv.rows() != tape.value(Q).rows() || pv.cols() != tape.value(Q).cols()) {
        throw std::invalid_argument("mi_var: shape mismatch " + pv.shape_str() + " vs " +
                                    tape.value(Q).shape_str());
    }
    const double inv_n = 1.0 / static_cast<double>(pv.rows());
    Var joint = tape.scale(tape.matmul(tape.transpose(P), Q), inv_n);  // C x C
    Var row_marg = tape.row_sum(joint);                                // C x 1
    Var col_marg = tape.col_sum(joint);                                // 1 x C
    Var denom = tape.matmul(row_marg, col_marg);                       // C x C
    Var ratio = tape.sub(tape.log(joint), tape.log(denom));
    return tape.sum_all(tape.mul(joint, ratio));
}

double mutual_information(const DenseArray& P, const DenseArray& Q) {
    Tape tape;
    return tape.scalar_value(mi_var(tape, tape.constant(P), tape.constant(Q)));
}

double mutual_information(const BatchDistributionPair& pair) {
    return mutual_information(pair.P, pair.Q);
}

double mi_oracle(const DenseArray& P, const DenseArray& Q) {
    const std::size_t n = P.rows(), c = P.cols();
    if (n < 1) throw std::invalid_argument("mi_oracle: empty batch");
    if (Q.rows() != n || Q.cols() != c) {
        throw std::invalid_argument("mi_oracle: shape mismatch " + P.shape_str() + " vs " +
                                    Q.shape_str());
    }
    std::vector<std::vector<double>> joint(c, std::vector<double>(c, 0.0));
    for (std::size_t a = 0; a < c; ++a) {
        for (std::size_t b = 0; b < c; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += P.at(i, a) * Q.at(i, b);
            joint[a][b] = s / static_cast<double>(n);
        }
    }
    std::vector<double> row(c, 0.0), col(c, 0.0);
    for (std::size_t a = 0; a < c; ++a)
        for (std::size_t b = 0; b < c; ++b) {
            row[a] += joint[a][b];
            col[b] += joint[a][b];
        }
    double mi = 0.0;
    for (std::size_t a = 0; a < c; ++a) {
        for (std::size_t b = 0; b < c; ++b) {
            const double j = joint[a][b];
            const double d = row[a] * col[b];
            mi += j * (std::log(std::max(j, kLogFloor)) - std::log(std::max(d, kLogFloor)));
        }
    }
    return mi;
}

double mi_oracle(const BatchDistributionPair& pair) { return mi_oracle(pair.P, pair.Q); }

Var entropy_var(Tape& tape, Var p_row) {
    Var plogp = tape.mul(p_row, tape.log(p_row));
    return tape.scale(tape.sum_all(plogp), -1.0);
}

std::vector<double> uniform_probs(std::size_t classes) {
    return std::vector<double>(classes, 1.0 / static_cast<double>(classes));
}

ProbVector row_as_prob(const DenseArray& m, std::size_t r) {
    std::vector<double> p(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) p[j] = m.at(r, j);
    return ProbVector(std::move(p));
}

}  // namespace drive
