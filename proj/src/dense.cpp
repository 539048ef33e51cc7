#include "drive/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace drive {

namespace {

std::size_t shape_size(const std::vector<std::size_t>& shp) {
    std::size_t n = 1;
    for (std::size_t d : shp) n *= d;
    return shp.empty() ? 0 : n;
}

[[noreturn]] void throw_shape(const char* op, const DenseArray& a, const DenseArray& b) {
    std::ostringstream os;
    os << op << ": shape mismatch " << a.shape_str() << " vs " << b.shape_str();
    throw std::invalid_argument(os.str());
}

void check_finite(const char* op, const DenseArray& out) {
    if (!out.all_finite()) {
        throw std::runtime_error(std::string(op) + ": non-finite output");
    }
}

void require_matrix(const char* op, const DenseArray& a) {
    if (a.rank() != 2) {
        throw std::invalid_argument(std::string(op) + ": expected rank-2 array, got " + a.shape_str());
    }
}

}  // namespace

DenseArray::DenseArray(std::vector<std::size_t> shp, double fill)
    : shape(std::move(shp)), data(shape_size(shape), fill) {}

DenseArray DenseArray::scalar(double v) { return DenseArray({1}, v); }

DenseArray DenseArray::vec(std::vector<double> v) {
    DenseArray a;
    a.shape = {v.size()};
    a.data = std::move(v);
    return a;
}

DenseArray DenseArray::mat(std::size_t r, std::size_t c, std::vector<double> v) {
    if (v.size() != r * c) {
        throw std::invalid_argument("DenseArray::mat: data length does not match " +
                                    std::to_string(r) + "x" + std::to_string(c));
    }
    DenseArray a;
    a.shape = {r, c};
    a.data = std::move(v);
    return a;
}

DenseArray DenseArray::zeros(std::vector<std::size_t> shp) { return DenseArray(std::move(shp), 0.0); }

DenseArray DenseArray::zeros_like(const DenseArray& a) { return DenseArray(a.shape, 0.0); }

DenseArray DenseArray::full(std::vector<std::size_t> shp, double v) { return DenseArray(std::move(shp), v); }

bool DenseArray::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double DenseArray::l2_norm() const {
    double s = 0.0;
    for (double v : data) s += v * v;
    return std::sqrt(s);
}

std::string DenseArray::shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

DenseArray extract_row(const DenseArray& m, std::size_t r) {
    const std::size_t c = m.cols();
    DenseArray out({1, c}, 0.0);
    for (std::size_t j = 0; j < c; ++j) out[j] = m.at(r, j);
    return out;
}

void set_row(DenseArray& m, std::size_t r, const DenseArray& row) {
    const std::size_t c = m.cols();
    if (row.size() != c) {
        throw std::invalid_argument("set_row: row length " + std::to_string(row.size()) +
                                    " does not match " + m.shape_str());
    }
    for (std::size_t j = 0; j < c; ++j) m.at(r, j) = row[j];
}

DenseArray matmul(const DenseArray& a, const DenseArray& b) {
    require_matrix("matmul", a);
    require_matrix("matmul", b);
    if (a.shape[1] != b.shape[0]) throw_shape("matmul", a, b);
    const std::size_t n = a.shape[0], k = a.shape[1], m = b.shape[1];
    DenseArray out({n, m}, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a.data[i * k + p];
            if (av == 0.0) continue;
            const double* brow = &b.data[p * m];
            double* orow = &out.data[i * m];
            for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
    check_finite("matmul", out);
    return out;
}

DenseArray transpose(const DenseArray& a) {
    require_matrix("transpose", a);
    const std::size_t n = a.shape[0], m = a.shape[1];
    DenseArray out({m, n}, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out.data[j * n + i] = a.data[i * m + j];
    return out;
}

DenseArray add(const DenseArray& a, const DenseArray& b) {
    if (!a.same_shape(b)) throw_shape("add", a, b);
    DenseArray out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    check_finite("add", out);
    return out;
}

DenseArray sub(const DenseArray& a, const DenseArray& b) {
    if (!a.same_shape(b)) throw_shape("sub", a, b);
    DenseArray out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    check_finite("sub", out);
    return out;
}

DenseArray mul(const DenseArray& a, const DenseArray& b) {
    if (!a.same_shape(b)) throw_shape("mul", a, b);
    DenseArray out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
    check_finite("mul", out);
    return out;
}

DenseArray add_rowvec(const DenseArray& m, const DenseArray& r) {
    const std::size_t cols = m.cols();
    if (r.size() != cols) throw_shape("add_rowvec", m, r);
    DenseArray out = m;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < cols; ++j) out.data[i * cols + j] += r[j];
    check_finite("add_rowvec", out);
    return out;
}

DenseArray add_scalar(const DenseArray& a, double s) {
    DenseArray out = a;
    for (double& v : out.data) v += s;
    check_finite("add_scalar", out);
    return out;
}

DenseArray scale(const DenseArray& a, double s) {
    DenseArray out = a;
    for (double& v : out.data) v *= s;
    check_finite("scale", out);
    return out;
}

DenseArray tanh_ew(const DenseArray& a) {
    DenseArray out = a;
    for (double& v : out.data) v = std::tanh(v);
    return out;
}

DenseArray exp_ew(const DenseArray& a) {
    DenseArray out = a;
    for (double& v : out.data) v = std::exp(v);
    check_finite("exp", out);
    return out;
}

DenseArray log_ew(const DenseArray& a) {
    DenseArray out = a;
    for (double& v : out.data) v = std::log(std::max(v, kLogFloor));
    check_finite("log", out);
    return out;
}

DenseArray softmax_rows(const DenseArray& a) {
    const std::size_t n = a.rows(), c = a.cols();
    DenseArray out = a;
    for (std::size_t i = 0; i < n; ++i) {
        double* row = &out.data[i * c];
        double mx = row[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            row[j] = std::exp(row[j] - mx);
            s += row[j];
        }
        for (std::size_t j = 0; j < c; ++j) row[j] /= s;
    }
    check_finite("softmax_rows", out);
    return out;
}

DenseArray row_sum(const DenseArray& a) {
    const std::size_t n = a.rows(), c = a.cols();
    DenseArray out({n, 1}, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += a.data[i * c + j];
        out[i] = s;
    }
    check_finite("row_sum", out);
    return out;
}

DenseArray col_sum(const DenseArray& a) {
    const std::size_t n = a.rows(), c = a.cols();
    DenseArray out({1, c}, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j] += a.data[i * c + j];
    check_finite("col_sum", out);
    return out;
}

DenseArray row_normalize(const DenseArray& a) {
    const std::size_t n = a.rows(), c = a.cols();
    DenseArray out = a;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += a.data[i * c + j] * a.data[i * c + j];
        const double nrm = std::max(std::sqrt(s), kLogFloor);
        for (std::size_t j = 0; j < c; ++j) out.data[i * c + j] /= nrm;
    }
    check_finite("row_normalize", out);
    return out;
}

double sum_all(const DenseArray& a) {
    double s = 0.0;
    for (double v : a.data) s += v;
    if (!std::isfinite(s)) throw std::runtime_error("sum_all: non-finite output");
    return s;
}

}  // namespace drive
