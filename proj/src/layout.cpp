#include "partlik/layout.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace partlik::layout {

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::horizontal: return "horizontal";
    case Kind::vertical: return "vertical";
    case Kind::complex_tiling: return "complex";
  }
  return "?";
}

Kind kind_from_name(const std::string& s) {
  if (s == "horizontal") return Kind::horizontal;
  if (s == "vertical") return Kind::vertical;
  if (s == "complex") return Kind::complex_tiling;
  throw LayoutError("unknown layout kind: " + s);
}

namespace {

void check_sorted_unique_in_range(const std::vector<int>& v, int limit, const char* what) {
  if (v.empty()) throw LayoutError(std::string(what) + ": empty id set");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0 || v[i] >= limit) throw LayoutError(std::string(what) + ": id out of range");
    if (i > 0 && v[i] <= v[i - 1]) throw LayoutError(std::string(what) + ": ids not strictly increasing");
  }
}

}  // namespace

void PartitionLayout::validate() const {
  if (n < 1 || p < 1) throw LayoutError("layout: n and p must be positive");
  if (nodes.empty()) throw LayoutError("layout: no nodes");
  if (static_cast<int>(columns.size()) != p) throw LayoutError("layout: columns length != p");
  std::set<int> ids;
  for (const auto& node : nodes) {
    if (node.node_id < 1) throw LayoutError("layout: node ids are 1-based");
    if (!ids.insert(node.node_id).second) throw LayoutError("layout: duplicate node id");
    check_sorted_unique_in_range(node.rows, n, "layout rows");
    check_sorted_unique_in_range(node.cols, p, "layout cols");
  }

  if (kind == Kind::vertical) {
    if (k() < 2) throw LayoutError("vertical layout needs at least 2 nodes");
    std::vector<bool> covered(static_cast<std::size_t>(p), false);
    for (const auto& node : nodes) {
      if (node.rows != nodes.front().rows)
        throw LayoutError("vertical layout: row sets must be identical");
      for (int c : node.cols) {
        if (covered[static_cast<std::size_t>(c)])
          throw LayoutError("vertical layout: overlapping column sets");
        covered[static_cast<std::size_t>(c)] = true;
      }
    }
    if (static_cast<int>(nodes.front().rows.size()) != n)
      throw LayoutError("vertical layout: rows must cover 0..n-1");
    for (bool c : covered)
      if (!c) throw LayoutError("vertical layout: columns not covered");
  } else if (kind == Kind::horizontal) {
    if (k() < 2) throw LayoutError("horizontal layout needs at least 2 nodes");
    std::vector<bool> covered(static_cast<std::size_t>(n), false);
    for (const auto& node : nodes) {
      if (node.cols != nodes.front().cols)
        throw LayoutError("horizontal layout: column sets must be identical");
      for (int r : node.rows) {
        if (covered[static_cast<std::size_t>(r)])
          throw LayoutError("horizontal layout: overlapping row sets");
        covered[static_cast<std::size_t>(r)] = true;
      }
    }
    if (static_cast<int>(nodes.front().cols.size()) != p)
      throw LayoutError("horizontal layout: columns must cover 0..p-1");
    for (bool c : covered)
      if (!c) throw LayoutError("horizontal layout: rows not covered");
  } else {
    // complex: node rectangles must tile the n x p grid exactly
    std::vector<int> owner(static_cast<std::size_t>(n) * static_cast<std::size_t>(p), 0);
    for (const auto& node : nodes)
      for (int r : node.rows)
        for (int c : node.cols) {
          auto& cell = owner[static_cast<std::size_t>(r) * static_cast<std::size_t>(p) +
                             static_cast<std::size_t>(c)];
          if (cell != 0) throw LayoutError("complex layout: overlapping cells");
          cell = node.node_id;
        }
    for (int cell : owner)
      if (cell == 0) throw LayoutError("complex layout: grid not fully covered");
  }
}

std::vector<std::vector<int>> PartitionLayout::col_sets() const {
  std::vector<std::vector<int>> sets;
  sets.reserve(nodes.size());
  for (const auto& node : nodes) sets.push_back(node.cols);
  return sets;
}

SubroutinePlan plan_subroutines(const PartitionLayout& layout) {
  layout.validate();

  // Per-row ownership signature over columns.
  std::vector<std::vector<int>> owner_of_row(
      static_cast<std::size_t>(layout.n),
      std::vector<int>(static_cast<std::size_t>(layout.p), 0));
  for (const auto& node : layout.nodes)
    for (int r : node.rows)
      for (int c : node.cols)
        owner_of_row[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = node.node_id;

  // Group rows by signature, bands ordered by lowest row id.
  std::map<std::vector<int>, std::vector<int>> groups;
  for (int r = 0; r < layout.n; ++r) groups[owner_of_row[static_cast<std::size_t>(r)]].push_back(r);

  std::vector<const std::pair<const std::vector<int>, std::vector<int>>*> ordered;
  for (const auto& g : groups) ordered.push_back(&g);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->second.front() < b->second.front(); });

  SubroutinePlan plan;
  for (const auto* g : ordered) {
    Band band;
    band.rows = g->second;
    std::map<int, std::vector<int>> cols_by_node;
    for (int c = 0; c < layout.p; ++c) cols_by_node[g->first[static_cast<std::size_t>(c)]].push_back(c);
    for (auto& [node_id, cols] : cols_by_node) band.members.emplace_back(node_id, std::move(cols));
    std::sort(band.members.begin(), band.members.end(),
              [](const auto& a, const auto& b) { return a.second.front() < b.second.front(); });
    plan.bands.push_back(std::move(band));
  }
  return plan;
}

PartitionLayout band_layout(const PartitionLayout& layout, const Band& band) {
  PartitionLayout sub;
  sub.kind = Kind::vertical;
  sub.n = static_cast<int>(band.rows.size());
  sub.p = layout.p;
  sub.columns = layout.columns;
  for (const auto& [node_id, cols] : band.members) {
    NodeSpan span;
    span.node_id = node_id;
    span.cols = cols;
    span.rows.resize(band.rows.size());
    for (std::size_t i = 0; i < band.rows.size(); ++i) span.rows[i] = static_cast<int>(i);
    sub.nodes.push_back(std::move(span));
  }
  return sub;
}

namespace {

std::vector<int> parse_rows(const nlohmann::json& j, int n) {
  std::vector<int> rows;
  if (j.is_string() && j.get<std::string>() == "all") {
    rows.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    return rows;
  }
  if (!j.is_array()) throw LayoutError("layout json: rows must be \"all\" or a list of [lo,hi] ranges");
  for (const auto& range : j) {
    if (!range.is_array() || range.size() != 2)
      throw LayoutError("layout json: row ranges are [lo,hi] (1-based inclusive)");
    int lo = range[0].get<int>(), hi = range[1].get<int>();
    if (lo < 1 || hi < lo) throw LayoutError("layout json: bad row range");
    for (int r = lo; r <= hi; ++r) rows.push_back(r - 1);
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

PartitionLayout load_layout_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw LayoutError(std::string("layout json parse error: ") + e.what());
  }
  PartitionLayout layout;
  layout.kind = kind_from_name(j.at("kind").get<std::string>());
  layout.n = j.at("n").get<int>();
  layout.columns = j.at("columns").get<std::vector<std::string>>();
  layout.p = static_cast<int>(layout.columns.size());

  std::map<std::string, int> col_index;
  for (int c = 0; c < layout.p; ++c) col_index[layout.columns[static_cast<std::size_t>(c)]] = c;

  for (const auto& nj : j.at("nodes")) {
    NodeSpan span;
    span.node_id = nj.at("id").get<int>();
    span.rows = nj.contains("rows") ? parse_rows(nj.at("rows"), layout.n)
                                    : parse_rows(nlohmann::json("all"), layout.n);
    for (const auto& name : nj.at("cols")) {
      auto it = col_index.find(name.get<std::string>());
      if (it == col_index.end())
        throw LayoutError("layout json: unknown column " + name.get<std::string>());
      span.cols.push_back(it->second);
    }
    std::sort(span.cols.begin(), span.cols.end());
    layout.nodes.push_back(std::move(span));
  }
  std::sort(layout.nodes.begin(), layout.nodes.end(),
            [](const NodeSpan& a, const NodeSpan& b) { return a.node_id < b.node_id; });
  layout.validate();
  return layout;
}

PartitionLayout load_layout_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LayoutError("cannot open layout file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_layout_json(ss.str());
}

std::string layout_to_json(const PartitionLayout& layout) {
  nlohmann::ordered_json j;
  j["kind"] = kind_name(layout.kind);
  j["n"] = layout.n;
  j["columns"] = layout.columns;
  j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& node : layout.nodes) {
    nlohmann::ordered_json nj;
    nj["id"] = node.node_id;
    nlohmann::ordered_json ranges = nlohmann::ordered_json::array();
    std::size_t i = 0;
    while (i < node.rows.size()) {
      std::size_t j2 = i;
      while (j2 + 1 < node.rows.size() && node.rows[j2 + 1] == node.rows[j2] + 1) ++j2;
      ranges.push_back({node.rows[i] + 1, node.rows[j2] + 1});
      i = j2 + 1;
    }
    nj["rows"] = ranges;
    std::vector<std::string> names;
    for (int c : node.cols) names.push_back(layout.columns[static_cast<std::size_t>(c)]);
    nj["cols"] = names;
    j["nodes"].push_back(nj);
  }
  return j.dump(2);
}

}  // namespace partlik::layout
