#include "partlik/protocol.hpp"

#include <cmath>

namespace partlik::protocol {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

Dd central_residue(const Matrix& p_noise, const DdMatrix& a1, const DdMatrix& a2,
                   const Matrix& minv) {
  Dd acc = trace_product(p_noise, a1) + trace_product(p_noise, a2) +
           trace_quadratic(p_noise, minv);
  return 0.5 * acc;
}

Dd next_node_residue(const Matrix& p_noise, const Matrix& q_noise) {
  Dd acc(0.0);
  for (Eigen::Index i = 0; i < p_noise.rows(); ++i)
    for (Eigen::Index k = 0; k < p_noise.cols(); ++k)
      acc += detail::two_prod(p_noise(i, k), q_noise(k, i));
  return -0.5 * acc;
}

CentralPlan cn_initiate(const mvn::ParameterSet& params,
                        const std::vector<std::vector<int>>& col_sets,
                        Eigen::Index n, double noise_scale, Rng& rng) {
  if (col_sets.size() < 2) throw LayoutError("cn_initiate: vertical run needs K >= 2 nodes");
  if (n < 1) throw LayoutError("cn_initiate: empty data partitions are rejected");

  const auto split = mvn::split_blocks(params, col_sets);
  const std::size_t kk = col_sets.size();

  CentralPlan plan;
  plan.n = n;

  // Assemble the covariance in node order, then peel one block per round via
  // the Schur complement. The leading block at step k is exactly the
  // conditional covariance the paper's central node distributes.
  Eigen::Index total = 0;
  for (const auto& cols : col_sets) total += static_cast<Eigen::Index>(cols.size());
  Matrix cur(total, total);
  {
    Eigen::Index ro = 0;
    for (std::size_t a = 0; a < kk; ++a) {
      Eigen::Index co = 0;
      const Eigen::Index pa = static_cast<Eigen::Index>(col_sets[a].size());
      for (std::size_t b = 0; b < kk; ++b) {
        const Eigen::Index pb = static_cast<Eigen::Index>(col_sets[b].size());
        cur.block(ro, co, pa, pb) = split.blocks[a][b];
        co += pb;
      }
      ro += pa;
    }
  }

  for (std::size_t k = 0; k < kk; ++k) {
    const Eigen::Index pk = static_cast<Eigen::Index>(col_sets[k].size());
    const Eigen::Index rest = cur.rows() - pk;
    plan.p_sizes.push_back(pk);

    Matrix own = cur.topLeftCorner(pk, pk);
    own = 0.5 * (own + own.transpose());
    plan.sigma_blocks.push_back(own);

    Matrix p_k = rng.uniform_matrix(n, pk, noise_scale);
    plan.p_noise.push_back(p_k);
    Matrix mu_rows = split.means[k].transpose().replicate(n, 1);
    plan.mu_noisy.push_back(DdMatrix::from(mu_rows) + p_k);

    if (rest > 0) {
      Matrix cross = cur.topRightCorner(pk, rest);
      plan.cross_blocks.push_back(cross);
      const Matrix minv = mvn::block_inverse(own);
      plan.c_mats.push_back(minv * cross);
      Matrix next = cur.bottomRightCorner(rest, rest) - cross.transpose() * (minv * cross);
      cur = 0.5 * (next + next.transpose());
    } else {
      plan.cross_blocks.emplace_back(pk, 0);
      plan.c_mats.emplace_back(pk, 0);
    }
  }
  return plan;
}

Dd compute_noisy_ll(const DdMatrix& mu_noisy, const Matrix& sigma_block,
                    const Matrix& x, const Matrix& r_noise) {
  const Eigen::Index n = x.rows();
  const Eigen::Index pk = x.cols();
  if (mu_noisy.rows() != n || mu_noisy.cols() != pk || r_noise.rows() != n ||
      r_noise.cols() != pk || sigma_block.rows() != pk)
    throw ShapeError("compute_noisy_ll: shape mismatch");

  const double ld = mvn::log_det(sigma_block);
  const Matrix minv = mvn::block_inverse(sigma_block);

  Dd acc(0.0);
  std::vector<Dd> u_plus(static_cast<std::size_t>(pk)), u_minus(static_cast<std::size_t>(pk));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < pk; ++j) {
      Dd dev = Dd(x(i, j)) - mu_noisy(i, j);
      u_plus[static_cast<std::size_t>(j)] = dev + Dd(r_noise(i, j));
      u_minus[static_cast<std::size_t>(j)] = dev - Dd(r_noise(i, j));
    }
    Dd qf(0.0);
    for (Eigen::Index a = 0; a < pk; ++a) {
      Dd t(0.0);
      for (Eigen::Index b = 0; b < pk; ++b) t += minv(a, b) * u_minus[static_cast<std::size_t>(b)];
      qf += u_plus[static_cast<std::size_t>(a)] * t;
    }
    Dd rq(0.0);
    for (Eigen::Index a = 0; a < pk; ++a)
      for (Eigen::Index b = 0; b < pk; ++b)
        rq += detail::two_prod(r_noise(i, a), minv(a, b)) * r_noise(i, b);
    acc += -0.5 * (Dd(static_cast<double>(pk) * kLog2Pi) + Dd(ld) + qf + rq);
  }
  return acc;
}

EnComputeResult en_compute(const DdMatrix& mu_noisy, const Matrix& sigma_block,
                           const Matrix& x, const std::optional<Dd>& ll_running,
                           double noise_scale, Rng& rng) {
  const Eigen::Index n = x.rows();
  const Eigen::Index pk = x.cols();
  if (mu_noisy.rows() != n || mu_noisy.cols() != pk)
    throw ShapeError("en_compute: mean block does not match data");

  EnComputeResult res;
  res.r = rng.uniform_matrix(n, pk, noise_scale);
  res.q = rng.uniform_matrix(pk, n, noise_scale);

  const Matrix minv = mvn::block_inverse(sigma_block);
  DdMatrix dev = x - mu_noisy;                 // n x pk
  res.a1 = mul_bt(minv, dev + res.r);          // Minv (X - mu~ + R)', p_k x n
  res.a2 = mul_bt(minv, dev - res.r);
  for (Eigen::Index a = 0; a < pk; ++a)
    for (Eigen::Index i = 0; i < n; ++i) res.a2(a, i) += Dd(res.q(a, i));

  res.ll_own = compute_noisy_ll(mu_noisy, sigma_block, x, res.r);
  res.ll_running = ll_running ? *ll_running + res.ll_own : res.ll_own;
  return res;
}

DdMatrix cn_adjust(const DdMatrix& a1, const DdMatrix& mu_tail_noisy,
                   const Matrix& cross_block) {
  if (a1.rows() != cross_block.rows())
    throw ShapeError("cn_adjust: bundle/cross shape mismatch");
  if (mu_tail_noisy.cols() != cross_block.cols() || mu_tail_noisy.rows() != a1.cols())
    throw ShapeError("cn_adjust: tail mean shape mismatch");
  // B = mu~_tail + A1' * cross  (row-observation orientation; a1 is p_k x n)
  DdMatrix b(mu_tail_noisy.rows(), mu_tail_noisy.cols());
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      Dd acc = mu_tail_noisy(i, j);
      for (Eigen::Index a = 0; a < a1.rows(); ++a) acc += a1(a, i) * Dd(cross_block(a, j));
      b(i, j) = acc;
    }
  return b;
}

EnAdjustResult en_adjust(const DdMatrix& b, const Matrix& c_mat, const Matrix& r_prev,
                         const Matrix& p_prev, const Matrix& q_prev, const Dd& ll_running,
                         const std::optional<Matrix>& m_prev, Eigen::Index own_cols,
                         double noise_scale, Rng& rng) {
  const Eigen::Index n = b.rows();
  const Eigen::Index p_plus = b.cols();
  if (own_cols < 1 || own_cols > p_plus)
    throw ShapeError("en_adjust: own block exceeds tail width");
  if (c_mat.cols() != p_plus || r_prev.cols() != c_mat.rows() || r_prev.rows() != n)
    throw ShapeError("en_adjust: C/R shape mismatch");
  if (m_prev && (m_prev->rows() != n || m_prev->cols() != p_plus))
    throw ProtocolOrderError("en_adjust: forwarded M has wrong shape");

  EnAdjustResult res;
  res.ll_star = ll_running - next_node_residue(p_prev, q_prev);

  // mu~_{x_k^+ | x_{k+1}^-} = B - M - (R - P) C
  DdMatrix mu = b - (r_prev - p_prev) * c_mat;
  if (m_prev) mu = mu - *m_prev;

  res.mu_own = mu.block(0, 0, n, own_cols);
  const Eigen::Index rest = p_plus - own_cols;
  res.mu_tail = mu.block(0, own_cols, n, rest);
  if (rest > 0) {
    res.m_next = rng.uniform_matrix(n, rest, noise_scale);
    res.mu_up = res.mu_tail + *res.m_next;
  }
  return res;
}

Dd fn_adjust(const Dd& ll_total, const Matrix& p_last, const Matrix& q_last) {
  if (p_last.rows() != q_last.cols() || p_last.cols() != q_last.rows())
    throw ShapeError("fn_adjust: P/Q shape mismatch");
  return ll_total - next_node_residue(p_last, q_last);
}

double cn_final(const Dd& ll_star, const std::vector<Matrix>& p_noise,
                const std::vector<DdMatrix>& a1, const std::vector<DdMatrix>& a2,
                const std::vector<Matrix>& sigma_blocks) {
  const std::size_t kk = p_noise.size();
  if (a1.size() != kk || a2.size() != kk || sigma_blocks.size() != kk)
    throw ProtocolOrderError("cn_final: missing adjustment bundles");
  Dd total = ll_star;
  for (std::size_t k = 0; k < kk; ++k) {
    const Matrix minv = mvn::block_inverse(sigma_blocks[k]);
    total -= central_residue(p_noise[k], a1[k], a2[k], minv);
  }
  return total.value();
}

}  // namespace partlik::protocol
