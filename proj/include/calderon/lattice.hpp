#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace calderon {

/// Node index; interior nodes come first, then boundary nodes, each block
/// in lexicographic coordinate order.
using NodeId = std::int32_t;
/// Index into Lattice::edges().
using EdgeId = std::int32_t;

enum class NodeKind { interior, boundary };

/// Edge with endpoints ordered so that `a` is lexicographically smaller than `b`.
struct EdgeKey {
  NodeId a = 0;
  NodeId b = 0;
};

struct Neighbor {
  NodeId node = 0;
  EdgeId edge = 0;
};

/// Node sets attached to one coordinate-sum level t.
///
/// L: interior nodes with coordinate sum t. K: boundary nodes with sum t, split
/// into K_plus (one coordinate equal to n+1) and K_minus (one coordinate equal
/// to 0). J = K_minus(t) + K_plus(t+1). The *_cum members are the unions over
/// all levels up to t (J_cum = K_minus_cum(t) + K_plus_cum(t+1)).
/// Every list is sorted by NodeId, which is the canonical ordering.
struct SliceSets {
  int level = 0;
  std::vector<NodeId> L, K, K_minus, K_plus, J;
  std::vector<NodeId> L_cum, K_minus_cum, K_plus_cum, J_cum;
};

/// Reflection of the lattice through a subset of axes; flags[i] != 0 reflects
/// x_i -> n+1-x_i. The origin corner has every flag cleared.
struct Corner {
  std::vector<std::uint8_t> flags;

  static Corner origin(int dim) { return Corner{std::vector<std::uint8_t>(dim, 0)}; }
  /// Corner whose flags are the binary digits of `mask`, axis 0 most significant,
  /// so increasing masks enumerate corners in lexicographic flag order.
  static Corner from_mask(int dim, unsigned mask);
  unsigned mask() const;
  bool is_origin() const;
  std::string to_string() const;

  friend bool operator==(const Corner&, const Corner&) = default;
};

/// Node and edge permutations induced by a corner reflection. Both are
/// involutions: node_perm[node_perm[i]] == i.
struct CornerMap {
  std::vector<NodeId> node_perm;
  std::vector<EdgeId> edge_perm;
};

/// Hypercubic lattice graph G = (E, D, dD) with interior D = [1,n]^d and
/// boundary nodes at l1 distance one from D. Immutable after construction.
class Lattice {
 public:
  Lattice(int dim, int size);

  int dim() const { return dim_; }
  int size() const { return size_; }

  std::size_t num_nodes() const { return kind_.size(); }
  std::size_t num_interior() const { return num_interior_; }
  std::size_t num_boundary() const { return num_nodes() - num_interior_; }
  std::size_t num_edges() const { return edges_.size(); }

  NodeKind kind(NodeId p) const { return kind_[p]; }
  bool is_interior(NodeId p) const { return kind_[p] == NodeKind::interior; }
  bool is_boundary(NodeId p) const { return kind_[p] == NodeKind::boundary; }

  std::span<const int> coords(NodeId p) const {
    return {coords_.data() + static_cast<std::size_t>(p) * dim_, static_cast<std::size_t>(dim_)};
  }
  int coord_sum(NodeId p) const { return coord_sum_[p]; }

  /// Boundary position (0-based, canonical boundary order) of a boundary node.
  std::size_t boundary_index(NodeId p) const { return static_cast<std::size_t>(p) - num_interior_; }
  NodeId boundary_node(std::size_t b) const { return static_cast<NodeId>(num_interior_ + b); }

  /// Node at the given coordinates, or -1 when no such node exists.
  NodeId find(std::span<const int> x) const;

  const std::vector<EdgeKey>& edges() const { return edges_; }
  const EdgeKey& edge(EdgeId e) const { return edges_[e]; }
  /// Edge joining p and q, or -1.
  EdgeId find_edge(NodeId p, NodeId q) const;

  std::span<const Neighbor> neighbors(NodeId p) const {
    return {adjacency_.data() + adj_offset_[p], adj_offset_[p + 1] - adj_offset_[p]};
  }

  /// Slice decomposition for 0 <= t <= d(n+1). Levels outside yield empty sets.
  SliceSets slice_sets(int t) const;

  /// Level s such that edge e joins level-s nodes (L_s or K_s^-) to level-(s+1)
  /// nodes (L_{s+1} or K_{s+1}^+); i.e. e belongs to the interface edge set E_s.
  int edge_level(EdgeId e) const;
  /// Edges of E_t in canonical order.
  std::vector<EdgeId> interface_edges(int t) const;

  /// Midpoint of edge e, one coordinate per axis.
  std::vector<double> midpoint(EdgeId e) const;

  CornerMap corner_map(const Corner& c) const;
  /// l1 distance from the midpoint of e to the interior corner node selected by c
  /// (coordinate 1 on unflagged axes, n on flagged ones).
  double corner_distance(EdgeId e, const Corner& c) const;

 private:
  int dim_;
  int size_;
  std::size_t num_interior_ = 0;
  std::vector<NodeKind> kind_;
  std::vector<int> coords_;
  std::vector<int> coord_sum_;
  std::vector<NodeId> grid_;  // (n+2)^d dense lookup, -1 for non-nodes
  std::vector<EdgeKey> edges_;
  std::vector<Neighbor> adjacency_;
  std::vector<std::size_t> adj_offset_;
  std::vector<int> edge_level_;

  // Per-level lists, filled at construction.
  std::vector<std::vector<NodeId>> level_L_, level_K_minus_, level_K_plus_;

  std::size_t grid_index(std::span<const int> x) const;
};

/// Dimension of the corner-excitation kernel at level t predicted by the lattice
/// structure: |J_t^S| + |L_t^S| - |L_{t+1}^S|.
std::size_t expected_kernel_dim(const Lattice& lat, int t);

/// All 2^d corners in lexicographic flag order.
std::vector<Corner> all_corners(int dim);

}  // namespace calderon
