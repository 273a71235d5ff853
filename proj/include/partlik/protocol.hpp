#ifndef PARTLIK_PROTOCOL_HPP
#define PARTLIK_PROTOCOL_HPP

#include <optional>
#include <vector>

#include "partlik/compensated.hpp"
#include "partlik/mvn.hpp"
#include "partlik/rng.hpp"

namespace partlik::protocol {

using mvn::Matrix;
using mvn::Vector;

// The masked per-node log-likelihood LL~_k differs from the true LL_k by two
// residues, fixed by expanding the quadratic form at the noisy mean
// (mu~ = mu + P) with the -1/2 convention throughout:
//
//   LL~_k = LL_k + central_residue_k + next_node_residue_k
//   central_residue_k   =  1/2 [tr(P A1) + tr(P A2) + tr(P Minv P')]
//   next_node_residue_k = -1/2 tr(P Q)
//
// The central node knows P, Minv and receives A1/A2, so it can subtract the
// first term; the following data node knows P and Q, so it cancels the second
// by adding 1/2 tr(P Q) before passing the total on. Summing over nodes
// restores the pooled log-likelihood exactly.

Dd central_residue(const Matrix& p_noise, const DdMatrix& a1, const DdMatrix& a2,
                   const Matrix& minv);
Dd next_node_residue(const Matrix& p_noise, const Matrix& q_noise);

// Central node initiate: conditional covariance blocks for every node by
// repeated Schur complement (no data needed), fresh P_k, noisy marginal
// means, and the C_k matrices.
struct CentralPlan {
  std::vector<Matrix> sigma_blocks;    // Sigma_{x_k x_k | x_k^-}
  std::vector<Matrix> cross_blocks;    // Sigma_{x_k x_k^+ | x_k^-} (empty at k = K)
  std::vector<Matrix> c_mats;          // C_k = Minv_k * cross_k
  std::vector<Matrix> p_noise;         // P_k, n x p_k
  std::vector<DdMatrix> mu_noisy;      // mu~_k = mu_k + P_k, n x p_k
  std::vector<Eigen::Index> p_sizes;
  Eigen::Index n = 0;
};
CentralPlan cn_initiate(const mvn::ParameterSet& params,
                        const std::vector<std::vector<int>>& col_sets,
                        Eigen::Index n, double noise_scale, Rng& rng);

// Noisy log-likelihood (the R terms cancel algebraically; computing through
// them is the point, the transmitted A-bundles carry the same R):
//   -1/2 sum_i [ p log 2pi + log|S| + (x-mu~+R) Minv (x-mu~-R)' + R Minv R' ]
Dd compute_noisy_ll(const DdMatrix& mu_noisy, const Matrix& sigma_block,
                    const Matrix& x, const Matrix& r_noise);

// External node computation: fresh R/Q, adjustment bundles, own noisy LL
// accumulated onto the running total.
struct EnComputeResult {
  Dd ll_running;  // LL~ through this node
  Dd ll_own;      // this node's LL~_k
  DdMatrix a1;    // p_k x n
  DdMatrix a2;    // p_k x n
  Matrix r;       // n x p_k
  Matrix q;       // p_k x n
};
EnComputeResult en_compute(const DdMatrix& mu_noisy, const Matrix& sigma_block,
                           const Matrix& x, const std::optional<Dd>& ll_running,
                           double noise_scale, Rng& rng);

// Central node adjustment: B_k = mu~_tail + A1' * cross_block.
DdMatrix cn_adjust(const DdMatrix& a1, const DdMatrix& mu_tail_noisy,
                   const Matrix& cross_block);

// External node adjustment at node k+1: removes the previous node's
// next-node residue from the running LL, recovers its own noisy conditional
// mean and the still-P-masked tail, and re-noises the tail for upload.
struct EnAdjustResult {
  Dd ll_star;                      // running total after residue removal
  DdMatrix mu_own;                 // mu~ for this node's block, n x p_k
  DdMatrix mu_tail;                // P-masked tail (node-internal), n x p_rest
  std::optional<DdMatrix> mu_up;   // tail + fresh M, for the central node
  std::optional<Matrix> m_next;    // the fresh M, forwarded down the chain
};
EnAdjustResult en_adjust(const DdMatrix& b, const Matrix& c_mat, const Matrix& r_prev,
                         const Matrix& p_prev, const Matrix& q_prev, const Dd& ll_running,
                         const std::optional<Matrix>& m_prev, Eigen::Index own_cols,
                         double noise_scale, Rng& rng);

// First node adjustment: cancels node K's next-node residue.
Dd fn_adjust(const Dd& ll_total, const Matrix& p_last, const Matrix& q_last);

// Central node final de-noising; returns the clean joint log-likelihood.
double cn_final(const Dd& ll_star, const std::vector<Matrix>& p_noise,
                const std::vector<DdMatrix>& a1, const std::vector<DdMatrix>& a2,
                const std::vector<Matrix>& sigma_blocks);

}  // namespace partlik::protocol

#endif
