#pragma once

#include <Eigen/Dense>

namespace mbio {

struct SymmetricEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // column j pairs with values(j)
};

/// Cyclic Jacobi eigendecomposition of a real symmetric matrix. Only the
/// upper triangle of `a` is read. Eigenvalues come back sorted descending.
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a);

/// Flips each column so its largest-magnitude entry is positive. Among
/// entries tied within 1e-9 relative, the lowest index decides.
void canonicalize_signs(Eigen::MatrixXd& columns);

/// Two-pass modified Gram-Schmidt over the columns, in order.
void orthonormalize_columns(Eigen::MatrixXd& columns);

}  // namespace mbio
