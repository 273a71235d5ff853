#ifndef PARTLIK_RUNTIME_HPP
#define PARTLIK_RUNTIME_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "partlik/layout.hpp"
#include "partlik/message.hpp"
#include "partlik/mvn.hpp"
#include "partlik/protocol.hpp"

namespace partlik::runtime {

using mvn::Matrix;
using mvn::Vector;

// One node's local matrix: columns in the order of its layout column set,
// rows in global row order.
struct NodeData {
  int node_id = 0;
  Matrix x;
};

struct EvalOptions {
  std::uint64_t seed = 1;
  std::uint64_t eval_id = 1;
  double noise_scale = 0.0;       // S for the protocol masks; 0 = zero-noise debug
  double ring_mask_scale = 1e12;  // secure-summation masks
  bool record = false;            // keep transcript + ledger export
};

// Test-side export of the per-evaluation noise ledger (never transmitted).
struct EvalLedger {
  std::uint64_t eval_id = 0;
  std::vector<Matrix> p, r, q;               // 1-based by chain position, [0] unused
  std::vector<std::optional<Matrix>> m;      // M_k forwarded by node k
  double band_mask = 0.0;
};

struct EvalOutcome {
  double ll = 0.0;
  msg::Transcript transcript;        // canonical order; filled when recording
  std::vector<EvalLedger> ledgers;   // one per vertical (sub)evaluation
};

// ---------------------------------------------------------------------------
// Node state machines, shared by the in-process bus and the TCP daemon.
// Handlers stash out-of-order arrivals internally, so transports only need
// to deliver each message to its receiver.

struct VerticalNodeConfig {
  int node_id = 0;          // physical id used in message addressing
  int position = 0;         // chain position k, 1-based
  int k_total = 0;          // K; 1 only for single-owner bands
  std::uint64_t seed = 1;
  std::uint64_t eval_id = 1;
  double noise_scale = 0.0;
  double band_mask_scale = 0.0;          // banded runs, position 1 only
  msg::NodeRef ring_next = msg::NodeRef::cn();  // unmask-ring successor
};

class DataNodeVertical {
 public:
  DataNodeVertical(VerticalNodeConfig cfg, Matrix x);

  std::vector<msg::ProtocolMessage> on_message(const msg::ProtocolMessage& m);

  const Matrix& r_noise() const { return r_; }
  const Matrix& q_noise() const { return q_; }
  const std::optional<Matrix>& m_noise() const { return m_next_; }
  double band_mask() const { return band_mask_; }

 private:
  std::vector<msg::ProtocolMessage> handle_marginal(const msg::MarginalParams& p);
  std::vector<msg::ProtocolMessage> maybe_adjust();
  std::vector<msg::ProtocolMessage> run_compute(const DdMatrix& mu_noisy,
                                                const Matrix& sigma_block,
                                                const std::optional<Dd>& running,
                                                std::optional<msg::ProtocolMessage> extra);
  msg::ProtocolMessage make(msg::NodeRef to, std::uint32_t round, msg::Payload payload);

  VerticalNodeConfig cfg_;
  Matrix x_;
  Rng rng_;
  Rng band_rng_;
  std::uint64_t next_seq_ = 1;

  std::optional<msg::ChainForward> chain_;      // from the previous node
  std::optional<msg::CentralForward> central_;  // from CN
  Matrix r_, q_;
  std::optional<Matrix> m_next_;
  std::optional<Matrix> p_last_;                // position 1 only
  double band_mask_ = 0.0;
  bool computed_ = false;
};

class CentralNodeVertical {
 public:
  CentralNodeVertical(VerticalNodeConfig cfg, mvn::ParameterSet params,
                      std::vector<std::vector<int>> col_sets,
                      std::vector<int> node_ids, Eigen::Index n);

  std::vector<msg::ProtocolMessage> start();
  std::vector<msg::ProtocolMessage> on_message(const msg::ProtocolMessage& m);

  bool done() const { return done_; }
  Dd result() const;
  const protocol::CentralPlan& plan() const { return plan_; }

 private:
  msg::ProtocolMessage make(msg::NodeRef to, std::uint32_t round, msg::Payload payload);
  std::vector<msg::ProtocolMessage> advance();
  DdMatrix marginal_tail() const;

  VerticalNodeConfig cfg_;
  mvn::ParameterSet params_;
  std::vector<std::vector<int>> col_sets_;
  std::vector<int> node_ids_;  // physical ids by chain position (1-based slot 0 unused)
  Eigen::Index n_;
  Rng rng_;
  std::uint64_t next_seq_ = 1;

  protocol::CentralPlan plan_;
  std::vector<std::optional<msg::BundleUp>> bundles_;  // 1-based
  std::vector<std::optional<DdMatrix>> mu_tails_;      // uploaded mu~*, 1-based
  int forwarded_upto_ = 1;
  std::optional<Dd> clean_;
  bool done_ = false;
  Dd result_;
};

// ---------------------------------------------------------------------------
// In-process evaluation (deterministic cooperative scheduling).

// Dispatches on layout.kind: vertical chain, horizontal ring, or band split.
EvalOutcome run_evaluation(const mvn::ParameterSet& params,
                           const layout::PartitionLayout& layout,
                           const std::vector<NodeData>& data,
                           const EvalOptions& opts);

// Secure-summation ring over horizontally partitioned rows.
EvalOutcome horizontal_round(const mvn::ParameterSet& params,
                             const layout::PartitionLayout& layout,
                             const std::vector<NodeData>& data,
                             const EvalOptions& opts);

// Band-split execution for complex tilings; band totals stay masked until a
// closing secure-summation pass.
EvalOutcome run_complex(const mvn::ParameterSet& params,
                        const layout::PartitionLayout& layout,
                        const std::vector<NodeData>& data,
                        const EvalOptions& opts);

// Recompute the central-node-visible reductions from a recorded transcript.
double replay(const msg::Transcript& transcript);

// Canonical transcript order: (eval_id, round, arrow rank, sender).
void canonicalize(msg::Transcript& t);

}  // namespace partlik::runtime

#endif
