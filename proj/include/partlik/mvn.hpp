#ifndef PARTLIK_MVN_HPP
#define PARTLIK_MVN_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "partlik/errors.hpp"

namespace partlik::mvn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Mean vector plus positive-definite covariance over p named variables.
struct ParameterSet {
  Vector mean;
  Matrix cov;
  std::vector<std::string> var_names;

  ParameterSet() = default;
  ParameterSet(Vector mu, Matrix sigma, std::vector<std::string> names = {});

  Eigen::Index dim() const { return mean.size(); }
};

// One node's share of the data: rows are observations, col_ids index into
// the global variable order.
struct DataPartition {
  Matrix rows;
  std::vector<int> col_ids;
  std::vector<int> row_ids;

  Eigen::Index n() const { return rows.rows(); }
  Eigen::Index p() const { return rows.cols(); }
};

// Blocks of a (conditionally) partitioned covariance: own block, cross block
// against the remaining tail, and the tail block.
struct ConditionalBlocks {
  Matrix own;        // p_k x p_k
  Matrix cross;      // p_k x p_plus
  Matrix remainder;  // p_plus x p_plus
};

// Cholesky factor; throws CovarianceNotPd when the matrix is not PD.
Matrix cholesky(const Matrix& sigma);

// log|Sigma| via Cholesky: 2 * sum(log diag L).
double log_det(const Matrix& sigma);

// Symmetric inverse of a PD matrix via its Cholesky factor. Every protocol
// participant inverts transmitted covariance blocks through this one routine
// so their de-noising terms cancel bit-for-bit.
Matrix block_inverse(const Matrix& sigma);

// Checks symmetry to 1e-12 relative and returns the symmetrized matrix.
Matrix require_symmetric(const Matrix& m, const char* what);

// Joint log-likelihood of all rows: sum_i -1/2 [p log(2 pi) + log|S| + q_i].
double log_likelihood(const ParameterSet& params, const DataPartition& data);

// Same, with a per-row mean matrix (full-information form).
double log_likelihood_rows(const Matrix& means, const Matrix& cov, const Matrix& data);

// One conditioning step: given the blocks of the current (conditional)
// covariance and the observed values for the leading block, produce the
// Schur-complement covariance of the tail and the per-row conditional means.
//   cov_out  = remainder - cross' * own^-1 * cross
//   mean_out = tail_mean + (observed - own_mean) * own^-1 * cross
struct ConditionResult {
  Matrix cond_cov;   // p_plus x p_plus
  Matrix cond_mean;  // n x p_plus
};
ConditionResult condition(const ConditionalBlocks& blocks,
                          const Matrix& observed,        // n x p_k
                          const Matrix& own_mean,        // n x p_k (per-row)
                          const Matrix& tail_mean);      // n x p_plus (per-row)

// Split (mu, Sigma) into per-node blocks for an ordered list of column sets.
struct BlockSplit {
  std::vector<Vector> means;                 // per node
  std::vector<std::vector<Matrix>> blocks;   // blocks[i][j] = Sigma_{x_i x_j}
};
BlockSplit split_blocks(const ParameterSet& params,
                        const std::vector<std::vector<int>>& col_sets);

// Reassemble a full covariance from split_blocks output (round-trip check).
Matrix reassemble(const BlockSplit& split,
                  const std::vector<std::vector<int>>& col_sets, Eigen::Index p);

}  // namespace partlik::mvn

#endif
