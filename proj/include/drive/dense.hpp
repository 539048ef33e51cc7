#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace drive {

// Floor applied inside every logarithm so entropy/KL terms stay finite for
// one-hot inputs.
inline constexpr double kLogFloor = 1e-12;

// Row-major dense array of 64-bit floats. Rank 1 arrays are treated as a
// single row by the row/col accessors; scalars are shape {1}.
struct DenseArray {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    DenseArray() = default;
    DenseArray(std::vector<std::size_t> shp, double fill);

    static DenseArray scalar(double v);
    static DenseArray vec(std::vector<double> v);
    static DenseArray mat(std::size_t r, std::size_t c, std::vector<double> v);
    static DenseArray zeros(std::vector<std::size_t> shp);
    static DenseArray zeros_like(const DenseArray& a);
    static DenseArray full(std::vector<std::size_t> shp, double v);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t rows() const { return rank() >= 2 ? shape[0] : 1; }
    std::size_t cols() const { return rank() >= 2 ? shape[1] : (rank() == 1 ? shape[0] : 0); }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    bool same_shape(const DenseArray& o) const { return shape == o.shape; }
    bool all_finite() const;
    double l2_norm() const;
    std::string shape_str() const;
};

DenseArray extract_row(const DenseArray& m, std::size_t r);
void set_row(DenseArray& m, std::size_t r, const DenseArray& row);

// Forward kernels. Each validates shapes (errors name the op and both shapes)
// and verifies the output is finite.
DenseArray matmul(const DenseArray& a, const DenseArray& b);
DenseArray transpose(const DenseArray& a);
DenseArray add(const DenseArray& a, const DenseArray& b);
DenseArray sub(const DenseArray& a, const DenseArray& b);
DenseArray mul(const DenseArray& a, const DenseArray& b);
DenseArray add_rowvec(const DenseArray& m, const DenseArray& r);
DenseArray add_scalar(const DenseArray& a, double s);
DenseArray scale(const DenseArray& a, double s);
DenseArray tanh_ew(const DenseArray& a);
DenseArray exp_ew(const DenseArray& a);
DenseArray log_ew(const DenseArray& a);  // log(max(x, kLogFloor))
DenseArray softmax_rows(const DenseArray& a);  // max-logit subtraction per row
DenseArray row_sum(const DenseArray& a);   // n x m -> n x 1
DenseArray col_sum(const DenseArray& a);   // n x m -> 1 x m
DenseArray row_normalize(const DenseArray& a);  // each row scaled to unit L2 norm
double sum_all(const DenseArray& a);

}  // namespace drive
