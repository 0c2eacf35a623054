#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "untangle/types.hpp"

namespace untangle {

// Symmetric matrix stored as block-compressed rows of dense b x b blocks
// (b = dimension). Both triangles are stored.
class BlockSparseMatrix {
public:
    BlockSparseMatrix() = default;

    // pattern[i] lists the block columns present in block row i; it is
    // sorted and deduplicated here.
    BlockSparseMatrix(int block_size, std::vector<std::vector<int>> pattern);

    [[nodiscard]] int block_size() const noexcept { return block_; }
    [[nodiscard]] int block_rows() const noexcept { return int(row_ptr_.size()) - 1; }
    [[nodiscard]] int rows() const noexcept { return block_rows() * block_; }
    [[nodiscard]] std::size_t num_blocks() const noexcept { return cols_.size(); }

    // Index of block (row, col) in storage order, or -1 if not in the pattern.
    [[nodiscard]] int find(int row, int col) const;

    [[nodiscard]] Eigen::Map<Mat> block(int index);
    [[nodiscard]] Eigen::Map<const Mat> block(int index) const;

    [[nodiscard]] std::span<const int> row_columns(int row) const;
    [[nodiscard]] int row_begin(int row) const { return row_ptr_[row]; }

    void set_zero();
    void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
    [[nodiscard]] Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;
    [[nodiscard]] Mat diagonal_block(int row) const;
    [[nodiscard]] Eigen::MatrixXd to_dense() const;

private:
    int block_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> cols_;
    std::vector<double> values_;
};

struct CgOptions {
    double rel_tol = 1e-8;
    int max_iterations = 1000;
    // Solve on the complement of per-block-coordinate constants (rigid
    // translations) when they lie in the null space.
    bool project_translations = false;
};

struct CgResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double rel_residual = 0;
    bool converged = false;
};

// Conjugate gradients preconditioned by the inverses of the diagonal blocks.
[[nodiscard]] CgResult block_jacobi_pcg(const BlockSparseMatrix& A, const Eigen::VectorXd& b,
                                        const CgOptions& options);

// Removes the mean of each block coordinate.
void project_out_translations(Eigen::VectorXd& x, int block_size);

}  // namespace untangle
