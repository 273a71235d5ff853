#include "partlik/mvn.hpp"

#include <cmath>
#include <numbers>

#include "partlik/compensated.hpp"

namespace partlik::mvn {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
}

ParameterSet::ParameterSet(Vector mu, Matrix sigma, std::vector<std::string> names)
    : mean(std::move(mu)), cov(std::move(sigma)), var_names(std::move(names)) {
  if (mean.size() != cov.rows() || cov.rows() != cov.cols())
    throw ShapeError("ParameterSet: mean length must equal covariance dimension");
  cov = require_symmetric(cov, "ParameterSet.cov");
  cholesky(cov);  // PD check
  if (var_names.empty()) {
    var_names.reserve(static_cast<std::size_t>(mean.size()));
    for (Eigen::Index i = 0; i < mean.size(); ++i)
      var_names.push_back("v" + std::to_string(i + 1));
  }
  if (static_cast<Eigen::Index>(var_names.size()) != mean.size())
    throw ShapeError("ParameterSet: var_names length mismatch");
}

Matrix require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw ShapeError(std::string(what) + ": not square");
  double scale = m.cwiseAbs().maxCoeff();
  double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (scale > 0 && asym > 1e-12 * scale)
    throw ShapeError(std::string(what) + ": asymmetric beyond 1e-12 relative");
  return 0.5 * (m + m.transpose());
}

Matrix cholesky(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw CovarianceNotPd("covariance is not positive definite");
  return llt.matrixL();
}

double log_det(const Matrix& sigma) {
  Matrix l = cholesky(sigma);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

Matrix block_inverse(const Matrix& sigma) {
  const Eigen::Index p = sigma.rows();
  Matrix l = cholesky(sigma);
  // Forward-substitute for L^-1, then Minv = L^-T L^-1 with an explicit
  // symmetric fill. Plain loops keep the result deterministic for identical
  // input bytes regardless of expression templates or vectorized kernels.
  Matrix linv = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    linv(j, j) = 1.0 / l(j, j);
    for (Eigen::Index i = j + 1; i < p; ++i) {
      double s = 0.0;
      for (Eigen::Index k = j; k < i; ++k) s += l(i, k) * linv(k, j);
      linv(i, j) = -s / l(i, i);
    }
  }
  Matrix minv(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      double s = 0.0;
      for (Eigen::Index k = j; k < p; ++k) s += linv(k, i) * linv(k, j);
      minv(i, j) = s;
      minv(j, i) = s;
    }
  }
  return minv;
}

double log_likelihood(const ParameterSet& params, const DataPartition& data) {
  if (data.p() != params.dim())
    throw ShapeError("log_likelihood: data column count != parameter dimension");
  Matrix means = params.mean.transpose().replicate(data.n(), 1);
  return log_likelihood_rows(means, params.cov, data.rows);
}

double log_likelihood_rows(const Matrix& means, const Matrix& cov, const Matrix& data) {
  if (means.rows() != data.rows() || means.cols() != data.cols())
    throw ShapeError("log_likelihood_rows: mean matrix shape mismatch");
  if (cov.rows() != data.cols())
    throw ShapeError("log_likelihood_rows: covariance dimension mismatch");
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  const double ld = log_det(cov);
  const Matrix minv = block_inverse(cov);

  Dd acc(0.0);
  Eigen::VectorXd d(p), t(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    d = data.row(i) - means.row(i);
    t.noalias() = minv * d;
    Dd q(0.0);
    for (Eigen::Index j = 0; j < p; ++j) q += detail::two_prod(d(j), t(j));
    acc += -0.5 * (Dd(static_cast<double>(p) * kLog2Pi) + Dd(ld) + q);
  }
  double out = acc.value();
  if (!std::isfinite(out)) throw DomainError("log_likelihood: non-finite result");
  return out;
}

ConditionResult condition(const ConditionalBlocks& blocks, const Matrix& observed,
                          const Matrix& own_mean, const Matrix& tail_mean) {
  const Eigen::Index pk = blocks.own.rows();
  const Eigen::Index pp = blocks.remainder.rows();
  if (blocks.cross.rows() != pk || blocks.cross.cols() != pp)
    throw ShapeError("condition: cross block shape mismatch");
  if (observed.cols() != pk || own_mean.cols() != pk || tail_mean.cols() != pp ||
      observed.rows() != own_mean.rows() || observed.rows() != tail_mean.rows())
    throw ShapeError("condition: observation/mean shape mismatch");

  const Matrix minv = block_inverse(blocks.own);
  ConditionResult r;
  r.cond_cov = blocks.remainder - blocks.cross.transpose() * minv * blocks.cross;
  r.cond_cov = 0.5 * (r.cond_cov + r.cond_cov.transpose());
  r.cond_mean = tail_mean + (observed - own_mean) * (minv * blocks.cross);
  return r;
}

BlockSplit split_blocks(const ParameterSet& params,
                        const std::vector<std::vector<int>>& col_sets) {
  const Eigen::Index p = params.dim();
  std::vector<bool> seen(static_cast<std::size_t>(p), false);
  for (const auto& cols : col_sets) {
    if (cols.empty()) throw LayoutError("split_blocks: empty column set");
    for (std::size_t j = 0; j < cols.size(); ++j) {
      int c = cols[j];
      if (c < 0 || c >= p) throw LayoutError("split_blocks: column index out of range");
      if (seen[static_cast<std::size_t>(c)])
        throw LayoutError("split_blocks: overlapping column sets");
      if (j > 0 && cols[j] <= cols[j - 1])
        throw LayoutError("split_blocks: column ids must be strictly increasing");
      seen[static_cast<std::size_t>(c)] = true;
    }
  }
  for (bool s : seen)
    if (!s) throw LayoutError("split_blocks: column sets do not cover all variables");

  BlockSplit out;
  out.means.reserve(col_sets.size());
  for (const auto& cols : col_sets) {
    Vector m(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) m(static_cast<Eigen::Index>(j)) = params.mean(cols[j]);
    out.means.push_back(std::move(m));
  }
  out.blocks.resize(col_sets.size());
  for (std::size_t a = 0; a < col_sets.size(); ++a) {
    out.blocks[a].resize(col_sets.size());
    for (std::size_t b = 0; b < col_sets.size(); ++b) {
      Matrix blk(static_cast<Eigen::Index>(col_sets[a].size()),
                 static_cast<Eigen::Index>(col_sets[b].size()));
      for (std::size_t i = 0; i < col_sets[a].size(); ++i)
        for (std::size_t j = 0; j < col_sets[b].size(); ++j)
          blk(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              params.cov(col_sets[a][i], col_sets[b][j]);
      out.blocks[a][b] = std::move(blk);
    }
  }
  return out;
}

Matrix reassemble(const BlockSplit& split,
                  const std::vector<std::vector<int>>& col_sets, Eigen::Index p) {
  Matrix full = Matrix::Zero(p, p);
  for (std::size_t a = 0; a < col_sets.size(); ++a)
    for (std::size_t b = 0; b < col_sets.size(); ++b)
      for (std::size_t i = 0; i < col_sets[a].size(); ++i)
        for (std::size_t j = 0; j < col_sets[b].size(); ++j)
          full(col_sets[a][i], col_sets[b][j]) =
              split.blocks[a][b](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return full;
}

}  // namespace partlik::mvn
