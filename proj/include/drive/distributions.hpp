#pragma once

#include <vector>

#include "drive/dense.hpp"
#include "drive/tape.hpp"

namespace drive {

// Point on the C-class probability simplex.
struct ProbVector {
    std::vector<double> p;

    explicit ProbVector(std::vector<double> probs);
    std::size_t classes() const { return p.size(); }
    double operator[](std::size_t i) const { return p[i]; }
    std::size_t argmax() const;
    double max_prob() const;
};

// Paired row-stochastic prediction batches fed to the MI estimator.
struct BatchDistributionPair {
    DenseArray P;
    DenseArray Q;

    BatchDistributionPair(DenseArray p, DenseArray q);
    std::size_t batch_size() const { return P.rows(); }
    std::size_t classes() const { return P.cols(); }
};

// Checks that every row of `m` lies on the simplex (sum within 1e-9, entries >= 0).
void validate_rows_stochastic(const DenseArray& m, const char* what);

double entropy(const ProbVector& p);                       // nats, in [0, log C]
double kl(const ProbVector& p, const ProbVector& q);       // q floored at kLogFloor
double js(const ProbVector& p, const ProbVector& q);       // bounded by log 2

// Batch mutual information of the empirical joint J = (1/n) sum_i p_i q_i^T,
// with marginals taken as J's row and column sums. Result in [0, log C].
double mutual_information(const BatchDistributionPair& pair);
double mutual_information(const DenseArray& P, const DenseArray& Q);

// Same contract as mutual_information, computed with naive nested loops and
// no shared code; kept as the verification oracle.
double mi_oracle(const BatchDistributionPair& pair);
double mi_oracle(const DenseArray& P, const DenseArray& Q);

// Differentiable graph builders used by the losses.
Var mi_var(Tape& tape, Var P, Var Q);
Var entropy_var(Tape& tape, Var p_row);

std::vector<double> uniform_probs(std::size_t classes);
ProbVector row_as_prob(const DenseArray& m, std::size_t r);

}  // namespace drive
