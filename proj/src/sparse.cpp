#include "untangle/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace untangle {

BlockSparseMatrix::BlockSparseMatrix(int block_size, std::vector<std::vector<int>> pattern) : block_(block_size) {
    row_ptr_.assign(1, 0);
    for (auto& row : pattern) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        cols_.insert(cols_.end(), row.begin(), row.end());
        row_ptr_.push_back(int(cols_.size()));
    }
    values_.assign(cols_.size() * std::size_t(block_ * block_), 0.0);
}

int BlockSparseMatrix::find(int row, int col) const {
    const auto first = cols_.begin() + row_ptr_[row];
    const auto last = cols_.begin() + row_ptr_[row + 1];
    const auto it = std::lower_bound(first, last, col);
    return (it != last && *it == col) ? int(it - cols_.begin()) : -1;
}

Eigen::Map<Mat> BlockSparseMatrix::block(int index) {
    return {values_.data() + std::size_t(index) * block_ * block_, block_, block_};
}

Eigen::Map<const Mat> BlockSparseMatrix::block(int index) const {
    return {values_.data() + std::size_t(index) * block_ * block_, block_, block_};
}

std::span<const int> BlockSparseMatrix::row_columns(int row) const {
    return {cols_.data() + row_ptr_[row], std::size_t(row_ptr_[row + 1] - row_ptr_[row])};
}

void BlockSparseMatrix::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

void BlockSparseMatrix::multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    y.setZero(rows());
    for (int i = 0; i < block_rows(); ++i) {
        auto yi = y.segment(std::ptrdiff_t(i) * block_, block_);
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            yi.noalias() += block(k) * x.segment(std::ptrdiff_t(cols_[k]) * block_, block_);
    }
}

Eigen::VectorXd BlockSparseMatrix::operator*(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y;
    multiply(x, y);
    return y;
}

Mat BlockSparseMatrix::diagonal_block(int row) const {
    const int k = find(row, row);
    if (k < 0) return Mat::Zero(block_, block_);
    return block(k);
}

Eigen::MatrixXd BlockSparseMatrix::to_dense() const {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows(), rows());
    for (int i = 0; i < block_rows(); ++i)
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            A.block(std::ptrdiff_t(i) * block_, std::ptrdiff_t(cols_[k]) * block_, block_, block_) = block(k);
    return A;
}

void project_out_translations(Eigen::VectorXd& x, int block_size) {
    const Eigen::Index n = x.size() / block_size;
    if (n == 0) return;
    auto blocks = x.reshaped(block_size, n);
    const Eigen::VectorXd mean = blocks.rowwise().mean();
    blocks.colwise() -= mean;
}

CgResult block_jacobi_pcg(const BlockSparseMatrix& A, const Eigen::VectorXd& b, const CgOptions& options) {
    const int bs = A.block_size();
    const int n = A.block_rows();
    CgResult result;
    result.x.setZero(b.size());
    if (b.size() == 0) {
        result.converged = true;
        return result;
    }

    std::vector<Eigen::LLT<Mat>> diag;
    diag.reserve(n);
    for (int i = 0; i < n; ++i) {
        diag.emplace_back(A.diagonal_block(i));
        if (diag.back().info() != Eigen::Success)
            throw std::runtime_error("block Jacobi preconditioner: diagonal block " + std::to_string(i) +
                                     " is not positive definite");
    }
    auto precondition = [&](const Eigen::VectorXd& r) {
        Eigen::VectorXd z(r.size());
        for (int i = 0; i < n; ++i)
            z.segment(std::ptrdiff_t(i) * bs, bs) = diag[i].solve(Vec(r.segment(std::ptrdiff_t(i) * bs, bs)));
        if (options.project_translations) project_out_translations(z, bs);
        return z;
    };

    Eigen::VectorXd r = b;
    if (options.project_translations) project_out_translations(r, bs);
    const double bnorm = r.norm();
    if (bnorm == 0.0) {
        result.converged = true;
        return result;
    }
    Eigen::VectorXd z = precondition(r);
    Eigen::VectorXd p = z;
    Eigen::VectorXd q;
    double rz = r.dot(z);

    for (int it = 0; it < options.max_iterations; ++it) {
        A.multiply(p, q);
        const double pq = p.dot(q);
        if (!(pq > 0.0)) break;   // lost positive definiteness (or NaN)
        const double alpha = rz / pq;
        result.x += alpha * p;
        r -= alpha * q;
        result.iterations = it + 1;
        result.rel_residual = r.norm() / bnorm;
        if (result.rel_residual <= options.rel_tol) {
            result.converged = true;
            break;
        }
        z = precondition(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    if (options.project_translations) project_out_translations(result.x, bs);
    return result;
}

}  // namespace untangle
