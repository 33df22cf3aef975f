#include "calderon/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>

namespace calderon {

namespace {

std::vector<NodeId> merge_sorted(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  std::vector<NodeId> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

Corner Corner::from_mask(int dim, unsigned mask) {
  Corner c = origin(dim);
  for (int i = 0; i < dim; ++i) c.flags[i] = (mask >> (dim - 1 - i)) & 1u;
  return c;
}

unsigned Corner::mask() const {
  unsigned m = 0;
  for (auto f : flags) m = (m << 1) | (f ? 1u : 0u);
  return m;
}

bool Corner::is_origin() const {
  return std::none_of(flags.begin(), flags.end(), [](auto f) { return f != 0; });
}

std::string Corner::to_string() const {
  std::string s;
  for (auto f : flags) s.push_back(f ? '1' : '0');
  return s;
}

std::vector<Corner> all_corners(int dim) {
  std::vector<Corner> out;
  for (unsigned m = 0; m < (1u << dim); ++m) out.push_back(Corner::from_mask(dim, m));
  return out;
}

Lattice::Lattice(int dim, int size) : dim_(dim), size_(size) {
  if (dim < 2) throw std::invalid_argument("lattice dimension must be at least 2");
  if (size < 1) throw std::invalid_argument("lattice size must be at least 1");

  const int side = size + 2;
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(side);

  // Lexicographic sweep of [0, n+1]^d, first axis most significant.
  std::vector<int> x(dim, 0);
  std::vector<int> interior_coords, boundary_coords;
  auto classify = [&](const std::vector<int>& p) -> int {
    int extreme = 0;
    for (int v : p) extreme += (v == 0 || v == size + 1) ? 1 : 0;
    return extreme;  // 0: interior, 1: boundary, >1: not a node
  };
  for (std::size_t k = 0; k < total; ++k) {
    const int extreme = classify(x);
    if (extreme == 0) interior_coords.insert(interior_coords.end(), x.begin(), x.end());
    if (extreme == 1) boundary_coords.insert(boundary_coords.end(), x.begin(), x.end());
    for (int i = dim - 1; i >= 0; --i) {
      if (++x[i] < side) break;
      x[i] = 0;
    }
  }

  num_interior_ = interior_coords.size() / dim;
  const std::size_t nb = boundary_coords.size() / dim;
  coords_ = std::move(interior_coords);
  coords_.insert(coords_.end(), boundary_coords.begin(), boundary_coords.end());
  kind_.assign(num_interior_, NodeKind::interior);
  kind_.resize(num_interior_ + nb, NodeKind::boundary);

  grid_.assign(total, -1);
  coord_sum_.resize(num_nodes());
  for (std::size_t p = 0; p < num_nodes(); ++p) {
    auto c = coords(static_cast<NodeId>(p));
    grid_[grid_index(c)] = static_cast<NodeId>(p);
    int s = 0;
    for (int v : c) s += v;
    coord_sum_[p] = s;
  }

  // Edges in lexicographic (smaller endpoint, larger endpoint) order. For a fixed
  // smaller endpoint a, a + e_i grows lexicographically as i decreases.
  {
    std::vector<int> y(dim, 0);
    std::vector<int> z(dim);
    for (std::size_t k = 0; k < total; ++k) {
      const NodeId a = grid_[grid_index(y)];
      if (a >= 0) {
        for (int i = dim - 1; i >= 0; --i) {
          if (y[i] + 1 >= side) continue;
          z = y;
          ++z[i];
          const NodeId b = grid_[grid_index(z)];
          if (b < 0) continue;
          if (is_boundary(a) && is_boundary(b)) continue;
          edges_.push_back({a, b});
        }
      }
      for (int i = dim - 1; i >= 0; --i) {
        if (++y[i] < side) break;
        y[i] = 0;
      }
    }
  }

  std::vector<std::vector<Neighbor>> adj(num_nodes());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    adj[edges_[e].a].push_back({edges_[e].b, static_cast<EdgeId>(e)});
    adj[edges_[e].b].push_back({edges_[e].a, static_cast<EdgeId>(e)});
  }
  adj_offset_.assign(num_nodes() + 1, 0);
  for (std::size_t p = 0; p < num_nodes(); ++p) {
    std::sort(adj[p].begin(), adj[p].end(), [](const Neighbor& l, const Neighbor& r) { return l.node < r.node; });
    adj_offset_[p + 1] = adj_offset_[p] + adj[p].size();
    adjacency_.insert(adjacency_.end(), adj[p].begin(), adj[p].end());
  }

  edge_level_.resize(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e)
    edge_level_[e] = std::min(coord_sum_[edges_[e].a], coord_sum_[edges_[e].b]);

  const int levels = dim * (size + 1) + 2;
  level_L_.assign(levels, {});
  level_K_minus_.assign(levels, {});
  level_K_plus_.assign(levels, {});
  for (std::size_t p = 0; p < num_nodes(); ++p) {
    const auto id = static_cast<NodeId>(p);
    const int s = coord_sum_[p];
    if (is_interior(id)) {
      level_L_[s].push_back(id);
      continue;
    }
    auto c = coords(id);
    if (std::find(c.begin(), c.end(), 0) != c.end())
      level_K_minus_[s].push_back(id);
    else
      level_K_plus_[s].push_back(id);
  }
}

std::size_t Lattice::grid_index(std::span<const int> x) const {
  std::size_t idx = 0;
  for (int v : x) idx = idx * static_cast<std::size_t>(size_ + 2) + static_cast<std::size_t>(v);
  return idx;
}

NodeId Lattice::find(std::span<const int> x) const {
  if (static_cast<int>(x.size()) != dim_) return -1;
  for (int v : x)
    if (v < 0 || v > size_ + 1) return -1;
  return grid_[grid_index(x)];
}

EdgeId Lattice::find_edge(NodeId p, NodeId q) const {
  for (const auto& nb : neighbors(p))
    if (nb.node == q) return nb.edge;
  return -1;
}

SliceSets Lattice::slice_sets(int t) const {
  const int levels = static_cast<int>(level_L_.size());
  auto at = [&](const std::vector<std::vector<NodeId>>& lv, int s) -> const std::vector<NodeId>& {
    static const std::vector<NodeId> empty;
    return (s >= 0 && s < levels) ? lv[s] : empty;
  };
  auto cum = [&](const std::vector<std::vector<NodeId>>& lv, int s) {
    std::vector<NodeId> out;
    for (int l = 0; l <= std::min(s, levels - 1); ++l) out.insert(out.end(), lv[l].begin(), lv[l].end());
    std::sort(out.begin(), out.end());
    return out;
  };

  SliceSets s;
  s.level = t;
  s.L = at(level_L_, t);
  s.K_minus = at(level_K_minus_, t);
  s.K_plus = at(level_K_plus_, t);
  s.K = merge_sorted(s.K_minus, s.K_plus);
  s.J = merge_sorted(s.K_minus, at(level_K_plus_, t + 1));
  s.L_cum = cum(level_L_, t);
  s.K_minus_cum = cum(level_K_minus_, t);
  s.K_plus_cum = cum(level_K_plus_, t);
  s.J_cum = merge_sorted(s.K_minus_cum, cum(level_K_plus_, t + 1));
  return s;
}

int Lattice::edge_level(EdgeId e) const { return edge_level_[e]; }

std::vector<EdgeId> Lattice::interface_edges(int t) const {
  std::vector<EdgeId> out;
  for (std::size_t e = 0; e < edges_.size(); ++e)
    if (edge_level_[e] == t) out.push_back(static_cast<EdgeId>(e));
  return out;
}

std::vector<double> Lattice::midpoint(EdgeId e) const {
  auto a = coords(edges_[e].a);
  auto b = coords(edges_[e].b);
  std::vector<double> m(dim_);
  for (int i = 0; i < dim_; ++i) m[i] = 0.5 * (a[i] + b[i]);
  return m;
}

CornerMap Lattice::corner_map(const Corner& c) const {
  if (static_cast<int>(c.flags.size()) != dim_) throw std::invalid_argument("corner dimension mismatch");
  CornerMap m;
  m.node_perm.resize(num_nodes());
  std::vector<int> y(dim_);
  for (std::size_t p = 0; p < num_nodes(); ++p) {
    auto x = coords(static_cast<NodeId>(p));
    for (int i = 0; i < dim_; ++i) y[i] = c.flags[i] ? size_ + 1 - x[i] : x[i];
    m.node_perm[p] = find(y);
  }
  m.edge_perm.resize(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e)
    m.edge_perm[e] = find_edge(m.node_perm[edges_[e].a], m.node_perm[edges_[e].b]);
  return m;
}

double Lattice::corner_distance(EdgeId e, const Corner& c) const {
  const auto m = midpoint(e);
  double dist = 0.0;
  for (int i = 0; i < dim_; ++i) dist += std::abs(m[i] - (c.flags[i] ? size_ : 1));
  return dist;
}

std::size_t expected_kernel_dim(const Lattice& lat, int t) {
  const auto s = lat.slice_sets(t);
  const auto next = lat.slice_sets(t + 1);
  return s.J_cum.size() + s.L_cum.size() - next.L_cum.size();
}

}  // namespace calderon
