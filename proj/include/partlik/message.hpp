#ifndef PARTLIK_MESSAGE_HPP
#define PARTLIK_MESSAGE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "partlik/compensated.hpp"
#include "partlik/errors.hpp"

namespace partlik::msg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Node address. Central is {central=true, id=0}; data nodes are 1-based.
struct NodeRef {
  bool central = false;
  int id = 0;

  static NodeRef cn() { return {true, 0}; }
  static NodeRef dn(int k) { return {false, k}; }
  bool operator==(const NodeRef&) const = default;
  std::string str() const { return central ? "C" : "D" + std::to_string(id); }
};
NodeRef node_from_str(const std::string& s);

// Payloads, one per arrow of the protocols. Noisy quantities travel as
// (hi, lo) pairs; clean parameters and raw noise matrices as plain doubles.

struct MarginalParams {     // CN -> DN1: Sigma_11, noisy marginal mean, P_K
  Matrix sigma_block;
  DdMatrix mu_noisy;        // n x p_1
  Matrix p_last;            // n x p_K
};
struct BundleUp {           // DNk -> CN
  DdMatrix a1;              // p_k x n
  DdMatrix a2;              // p_k x n
};
struct CondMeanUp {         // DNk -> CN (interior nodes only)
  DdMatrix mu_up;           // n x p_plus
};
struct ChainForward {       // DNk -> DN(k+1)
  Dd ll;
  Matrix r;                 // n x p_k
  Matrix q;                 // p_k x n
  std::optional<Matrix> m;  // n x p_plus, absent at k = 1
};
struct CentralForward {     // CN -> DNk, k >= 2
  Matrix sigma_block;
  DdMatrix b;               // n x p_plus of node k-1
  Matrix c;                 // p_{k-1} x p_plus
  Matrix p_noise;           // n x p_{k-1}
};
struct FinalToFirst {       // DNK -> DN1
  Dd ll;
  Matrix q;                 // p_K x n
};
struct CleanRequest {       // DN1 -> CN
  Dd ll;
};
struct FullParams {         // CN -> DNk (horizontal round)
  Vector mu;
  Matrix sigma;
};
struct RingSum {            // masked accumulator hop
  Dd value;
};
struct FinalShare {         // final total announcement
  double value = 0.0;
};

using Payload = std::variant<MarginalParams, BundleUp, CondMeanUp, ChainForward,
                             CentralForward, FinalToFirst, CleanRequest,
                             FullParams, RingSum, FinalShare>;

const char* payload_kind_name(const Payload& p);

struct ProtocolMessage {
  std::uint64_t msg_id = 0;
  std::uint64_t eval_id = 0;
  std::uint32_t round = 0;
  NodeRef sender;
  NodeRef receiver;
  Payload payload;
  std::uint64_t ts_ms = 0;  // transcript metadata, excluded from equality
};

// Canonical binary encoding: fixed field order, little-endian IEEE doubles.
std::vector<std::uint8_t> encode_binary(const ProtocolMessage& m);
ProtocolMessage decode_binary(const std::uint8_t* data, std::size_t size);

// One-line JSON encoding used for transcript files.
std::string encode_jsonl(const ProtocolMessage& m);
ProtocolMessage decode_jsonl(const std::string& line);

struct Transcript {
  std::vector<ProtocolMessage> messages;

  std::string to_jsonl() const;
  static Transcript from_jsonl(const std::string& text);
  static Transcript from_file(const std::string& path);
  void append_file(const std::string& path) const;

  // Byte equality of the canonical encodings, timestamps excluded.
  bool equals_modulo_ts(const Transcript& other) const;
};

}  // namespace partlik::msg

#endif
