#ifndef PARTLIK_LAYOUT_HPP
#define PARTLIK_LAYOUT_HPP

#include <string>
#include <utility>
#include <vector>

#include "partlik/errors.hpp"

namespace partlik::layout {

enum class Kind { horizontal, vertical, complex_tiling };

std::string kind_name(Kind k);
Kind kind_from_name(const std::string& s);

// One node's rectangle of the n x p grid (row ids x column ids, 0-based).
struct NodeSpan {
  int node_id = 0;            // 1-based, protocol order
  std::vector<int> rows;      // sorted ascending
  std::vector<int> cols;      // sorted ascending
};

struct PartitionLayout {
  Kind kind = Kind::vertical;
  int n = 0;
  int p = 0;
  std::vector<std::string> columns;  // global variable order, length p
  std::vector<NodeSpan> nodes;

  int k() const { return static_cast<int>(nodes.size()); }

  // Checks the kind-specific invariants; throws LayoutError.
  void validate() const;

  // Column sets in node order (vertical layouts).
  std::vector<std::vector<int>> col_sets() const;
};

// A row band whose columns are vertically split across member nodes.
struct Band {
  std::vector<int> rows;  // global row ids, ascending
  // (node_id, column ids) in conditioning order: nodes sorted by first column.
  std::vector<std::pair<int, std::vector<int>>> members;
};

struct SubroutinePlan {
  std::vector<Band> bands;
};

// Reduce any valid layout to horizontally distinct vertical subproblems.
// Rows are grouped by their column-ownership signature; groups are ordered
// by lowest row id.
SubroutinePlan plan_subroutines(const PartitionLayout& layout);

// The vertical layout a band induces (band rows renumbered 0..m-1).
PartitionLayout band_layout(const PartitionLayout& layout, const Band& band);

// JSON file format: {"kind":..., "n":..., "columns":[...],
//   "nodes":[{"id":1,"rows":[[lo,hi],...]|"all","cols":["name",...]},...]}
// with 1-based inclusive row ranges.
PartitionLayout load_layout_json(const std::string& text);
PartitionLayout load_layout_file(const std::string& path);
std::string layout_to_json(const PartitionLayout& layout);

}  // namespace partlik::layout

#endif
