#include "partlik/message.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace partlik::msg {

NodeRef node_from_str(const std::string& s) {
  if (s == "C") return NodeRef::cn();
  if (s.size() >= 2 && s[0] == 'D') return NodeRef::dn(std::stoi(s.substr(1)));
  throw Error("bad node ref: " + s);
}

const char* payload_kind_name(const Payload& p) {
  switch (p.index()) {
    case 0: return "marginal_params";
    case 1: return "bundle_up";
    case 2: return "cond_mean_up";
    case 3: return "chain_forward";
    case 4: return "central_forward";
    case 5: return "final_to_first";
    case 6: return "clean_request";
    case 7: return "full_params";
    case 8: return "ring_sum";
    case 9: return "final_share";
  }
  return "?";
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "wire encoding assumes a little-endian host");

struct Writer {
  std::vector<std::uint8_t> out;

  void u8(std::uint8_t v) { out.push_back(v); }
  void u16(std::uint16_t v) { append(&v, 2); }
  void u32(std::uint32_t v) { append(&v, 4); }
  void u64(std::uint64_t v) { append(&v, 8); }
  void f64(double v) { append(&v, 8); }
  void append(const void* p, std::size_t len) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + len);
  }

  void matrix(const Matrix& m) {
    u32(static_cast<std::uint32_t>(m.rows()));
    u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
  }
  void vector(const Vector& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
  }
  void dd(const Dd& v) {
    f64(v.hi);
    f64(v.lo);
  }
  void dd_matrix(const DdMatrix& m) {
    u32(static_cast<std::uint32_t>(m.rows()));
    u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        f64(m(i, j).hi);
        f64(m(i, j).lo);
      }
  }
};

struct Reader {
  const std::uint8_t* p;
  const std::uint8_t* end;

  void need(std::size_t len) const {
    if (static_cast<std::size_t>(end - p) < len) throw Error("message decode: truncated frame");
  }
  std::uint8_t u8() { need(1); return *p++; }
  std::uint16_t u16() { std::uint16_t v; need(2); std::memcpy(&v, p, 2); p += 2; return v; }
  std::uint32_t u32() { std::uint32_t v; need(4); std::memcpy(&v, p, 4); p += 4; return v; }
  std::uint64_t u64() { std::uint64_t v; need(8); std::memcpy(&v, p, 8); p += 8; return v; }
  double f64() { double v; need(8); std::memcpy(&v, p, 8); p += 8; return v; }

  Matrix matrix() {
    std::uint32_t r = u32(), c = u32();
    Matrix m(r, c);
    for (std::uint32_t i = 0; i < r; ++i)
      for (std::uint32_t j = 0; j < c; ++j) m(i, j) = f64();
    return m;
  }
  Vector vector() {
    std::uint32_t n = u32();
    Vector v(n);
    for (std::uint32_t i = 0; i < n; ++i) v(i) = f64();
    return v;
  }
  Dd dd() {
    double hi = f64(), lo = f64();
    return {hi, lo};
  }
  DdMatrix dd_matrix() {
    std::uint32_t r = u32(), c = u32();
    DdMatrix m(r, c);
    for (std::uint32_t i = 0; i < r; ++i)
      for (std::uint32_t j = 0; j < c; ++j) {
        double hi = f64(), lo = f64();
        m(i, j) = Dd(hi, lo);
      }
    return m;
  }
};

void encode_payload(Writer& w, const Payload& p) {
  w.u8(static_cast<std::uint8_t>(p.index()));
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, MarginalParams>) {
          w.matrix(v.sigma_block);
          w.dd_matrix(v.mu_noisy);
          w.matrix(v.p_last);
        } else if constexpr (std::is_same_v<T, BundleUp>) {
          w.dd_matrix(v.a1);
          w.dd_matrix(v.a2);
        } else if constexpr (std::is_same_v<T, CondMeanUp>) {
          w.dd_matrix(v.mu_up);
        } else if constexpr (std::is_same_v<T, ChainForward>) {
          w.dd(v.ll);
          w.matrix(v.r);
          w.matrix(v.q);
          w.u8(v.m.has_value() ? 1 : 0);
          if (v.m) w.matrix(*v.m);
        } else if constexpr (std::is_same_v<T, CentralForward>) {
          w.matrix(v.sigma_block);
          w.dd_matrix(v.b);
          w.matrix(v.c);
          w.matrix(v.p_noise);
        } else if constexpr (std::is_same_v<T, FinalToFirst>) {
          w.dd(v.ll);
          w.matrix(v.q);
        } else if constexpr (std::is_same_v<T, CleanRequest>) {
          w.dd(v.ll);
        } else if constexpr (std::is_same_v<T, FullParams>) {
          w.vector(v.mu);
          w.matrix(v.sigma);
        } else if constexpr (std::is_same_v<T, RingSum>) {
          w.dd(v.value);
        } else if constexpr (std::is_same_v<T, FinalShare>) {
          w.f64(v.value);
        }
      },
      p);
}

Payload decode_payload(Reader& r) {
  std::uint8_t kind = r.u8();
  switch (kind) {
    case 0: {
      MarginalParams v;
      v.sigma_block = r.matrix();
      v.mu_noisy = r.dd_matrix();
      v.p_last = r.matrix();
      return v;
    }
    case 1: {
      BundleUp v;
      v.a1 = r.dd_matrix();
      v.a2 = r.dd_matrix();
      return v;
    }
    case 2: {
      CondMeanUp v;
      v.mu_up = r.dd_matrix();
      return v;
    }
    case 3: {
      ChainForward v;
      v.ll = r.dd();
      v.r = r.matrix();
      v.q = r.matrix();
      if (r.u8()) v.m = r.matrix();
      return v;
    }
    case 4: {
      CentralForward v;
      v.sigma_block = r.matrix();
      v.b = r.dd_matrix();
      v.c = r.matrix();
      v.p_noise = r.matrix();
      return v;
    }
    case 5: {
      FinalToFirst v;
      v.ll = r.dd();
      v.q = r.matrix();
      return v;
    }
    case 6: {
      CleanRequest v;
      v.ll = r.dd();
      return v;
    }
    case 7: {
      FullParams v;
      v.mu = r.vector();
      v.sigma = r.matrix();
      return v;
    }
    case 8: {
      RingSum v;
      v.value = r.dd();
      return v;
    }
    case 9: {
      FinalShare v;
      v.value = r.f64();
      return v;
    }
    default:
      throw Error("message decode: unknown payload kind");
  }
}

}  // namespace

std::vector<std::uint8_t> encode_binary(const ProtocolMessage& m) {
  Writer w;
  w.u64(m.msg_id);
  w.u64(m.eval_id);
  w.u32(m.round);
  w.u8(m.sender.central ? 1 : 0);
  w.u16(static_cast<std::uint16_t>(m.sender.id));
  w.u8(m.receiver.central ? 1 : 0);
  w.u16(static_cast<std::uint16_t>(m.receiver.id));
  encode_payload(w, m.payload);
  return std::move(w.out);
}

ProtocolMessage decode_binary(const std::uint8_t* data, std::size_t size) {
  Reader r{data, data + size};
  ProtocolMessage m;
  m.msg_id = r.u64();
  m.eval_id = r.u64();
  m.round = r.u32();
  m.sender.central = r.u8() != 0;
  m.sender.id = r.u16();
  m.receiver.central = r.u8() != 0;
  m.receiver.id = r.u16();
  m.payload = decode_payload(r);
  if (r.p != r.end) throw Error("message decode: trailing bytes");
  return m;
}

namespace {

using Json = nlohmann::ordered_json;

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  Json out;
  out["r"] = m.rows();
  out["c"] = m.cols();
  out["v"] = std::move(rows);
  return out;
}

Matrix matrix_from_json(const Json& j) {
  Matrix m(j.at("r").get<Eigen::Index>(), j.at("c").get<Eigen::Index>());
  const auto& rows = j.at("v");
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index jj = 0; jj < m.cols(); ++jj)
      m(i, jj) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(jj)].get<double>();
  return m;
}

Json dd_matrix_json(const DdMatrix& m) {
  Json out;
  out["hi"] = matrix_json(m.hi());
  out["lo"] = matrix_json(m.lo());
  return out;
}

DdMatrix dd_matrix_from_json(const Json& j) {
  return DdMatrix::from_parts(matrix_from_json(j.at("hi")), matrix_from_json(j.at("lo")));
}

Json dd_json(const Dd& v) { return Json{{"hi", v.hi}, {"lo", v.lo}}; }
Dd dd_from_json(const Json& j) { return {j.at("hi").get<double>(), j.at("lo").get<double>()}; }

Json vector_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Json payload_json(const Payload& p) {
  Json out;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, MarginalParams>) {
          out["sigma_block"] = matrix_json(v.sigma_block);
          out["mu_noisy"] = dd_matrix_json(v.mu_noisy);
          out["p_last"] = matrix_json(v.p_last);
        } else if constexpr (std::is_same_v<T, BundleUp>) {
          out["a1"] = dd_matrix_json(v.a1);
          out["a2"] = dd_matrix_json(v.a2);
        } else if constexpr (std::is_same_v<T, CondMeanUp>) {
          out["mu_up"] = dd_matrix_json(v.mu_up);
        } else if constexpr (std::is_same_v<T, ChainForward>) {
          out["ll"] = dd_json(v.ll);
          out["r"] = matrix_json(v.r);
          out["q"] = matrix_json(v.q);
          if (v.m) out["m"] = matrix_json(*v.m);
        } else if constexpr (std::is_same_v<T, CentralForward>) {
          out["sigma_block"] = matrix_json(v.sigma_block);
          out["b"] = dd_matrix_json(v.b);
          out["c"] = matrix_json(v.c);
          out["p_noise"] = matrix_json(v.p_noise);
        } else if constexpr (std::is_same_v<T, FinalToFirst>) {
          out["ll"] = dd_json(v.ll);
          out["q"] = matrix_json(v.q);
        } else if constexpr (std::is_same_v<T, CleanRequest>) {
          out["ll"] = dd_json(v.ll);
        } else if constexpr (std::is_same_v<T, FullParams>) {
          out["mu"] = vector_json(v.mu);
          out["sigma"] = matrix_json(v.sigma);
        } else if constexpr (std::is_same_v<T, RingSum>) {
          out["value"] = dd_json(v.value);
        } else if constexpr (std::is_same_v<T, FinalShare>) {
          out["value"] = v.value;
        }
      },
      p);
  return out;
}

Payload payload_from_json(const std::string& kind, const Json& j) {
  if (kind == "marginal_params") {
    MarginalParams v;
    v.sigma_block = matrix_from_json(j.at("sigma_block"));
    v.mu_noisy = dd_matrix_from_json(j.at("mu_noisy"));
    v.p_last = matrix_from_json(j.at("p_last"));
    return v;
  }
  if (kind == "bundle_up") {
    BundleUp v;
    v.a1 = dd_matrix_from_json(j.at("a1"));
    v.a2 = dd_matrix_from_json(j.at("a2"));
    return v;
  }
  if (kind == "cond_mean_up") {
    CondMeanUp v;
    v.mu_up = dd_matrix_from_json(j.at("mu_up"));
    return v;
  }
  if (kind == "chain_forward") {
    ChainForward v;
    v.ll = dd_from_json(j.at("ll"));
    v.r = matrix_from_json(j.at("r"));
    v.q = matrix_from_json(j.at("q"));
    if (j.contains("m")) v.m = matrix_from_json(j.at("m"));
    return v;
  }
  if (kind == "central_forward") {
    CentralForward v;
    v.sigma_block = matrix_from_json(j.at("sigma_block"));
    v.b = dd_matrix_from_json(j.at("b"));
    v.c = matrix_from_json(j.at("c"));
    v.p_noise = matrix_from_json(j.at("p_noise"));
    return v;
  }
  if (kind == "final_to_first") {
    FinalToFirst v;
    v.ll = dd_from_json(j.at("ll"));
    v.q = matrix_from_json(j.at("q"));
    return v;
  }
  if (kind == "clean_request") {
    CleanRequest v;
    v.ll = dd_from_json(j.at("ll"));
    return v;
  }
  if (kind == "full_params") {
    FullParams v;
    v.mu = vector_from_json(j.at("mu"));
    v.sigma = matrix_from_json(j.at("sigma"));
    return v;
  }
  if (kind == "ring_sum") {
    RingSum v;
    v.value = dd_from_json(j.at("value"));
    return v;
  }
  if (kind == "final_share") {
    FinalShare v;
    v.value = j.at("value").get<double>();
    return v;
  }
  throw Error("transcript decode: unknown payload kind " + kind);
}

}  // namespace

std::string encode_jsonl(const ProtocolMessage& m) {
  Json j;
  j["msg_id"] = m.msg_id;
  j["eval_id"] = m.eval_id;
  j["round"] = m.round;
  j["sender"] = m.sender.str();
  j["receiver"] = m.receiver.str();
  j["kind"] = payload_kind_name(m.payload);
  j["payload"] = payload_json(m.payload);
  j["ts"] = m.ts_ms;
  return j.dump();
}

ProtocolMessage decode_jsonl(const std::string& line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ReplayError(std::string("transcript parse error: ") + e.what());
  }
  ProtocolMessage m;
  m.msg_id = j.at("msg_id").get<std::uint64_t>();
  m.eval_id = j.at("eval_id").get<std::uint64_t>();
  m.round = j.at("round").get<std::uint32_t>();
  m.sender = node_from_str(j.at("sender").get<std::string>());
  m.receiver = node_from_str(j.at("receiver").get<std::string>());
  m.payload = payload_from_json(j.at("kind").get<std::string>(), j.at("payload"));
  m.ts_ms = j.value("ts", 0ULL);
  return m;
}

std::string Transcript::to_jsonl() const {
  std::string out;
  for (const auto& m : messages) {
    out += encode_jsonl(m);
    out += '\n';
  }
  return out;
}

Transcript Transcript::from_jsonl(const std::string& text) {
  Transcript t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.messages.push_back(decode_jsonl(line));
  }
  return t;
}

Transcript Transcript::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ReplayError("cannot open transcript: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_jsonl(ss.str());
}

void Transcript::append_file(const std::string& path) const {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot open transcript for writing: " + path);
  out << to_jsonl();
}

bool Transcript::equals_modulo_ts(const Transcript& other) const {
  if (messages.size() != other.messages.size()) return false;
  for (std::size_t i = 0; i < messages.size(); ++i)
    if (encode_binary(messages[i]) != encode_binary(other.messages[i])) return false;
  return true;
}

}  // namespace partlik::msg
