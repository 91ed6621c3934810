#ifndef ISORC_RCM_HPP
#define ISORC_RCM_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "isorc/graph.hpp"
#include "isorc/rng.hpp"
#include "isorc/weights.hpp"

namespace isorc {

// Edge-indexed binary assignment, stamped with the graph version so
// stale configurations are rejected fast.
struct Configuration {
  std::vector<std::uint8_t> open;
  std::uint64_t version = 0;

  static Configuration zeros(int n, std::uint64_t version) {
    Configuration c;
    c.open.assign(n, 0);
    c.version = version;
    return c;
  }
  int size() const { return static_cast<int>(open.size()); }
  bool is_open(int e) const { return open[e] != 0; }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string s;
    int nibble = 0, filled = 0;
    for (int e = 0; e < size(); ++e) {
      nibble |= (open[e] ? 1 : 0) << (e % 4);
      if (e % 4 == 3) {
        s.push_back(digits[nibble]);
        nibble = 0;
        ++filled;
      }
    }
    if (size() % 4 != 0) s.push_back(digits[nibble]);
    return s;
  }

  static Configuration from_hex(const std::string& s, int n, std::uint64_t version) {
    Configuration c = zeros(n, version);
    auto val = [](char ch) -> int {
      if (ch >= '0' && ch <= '9') return ch - '0';
      if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
      throw std::invalid_argument("Configuration::from_hex: bad digit");
    };
    for (int e = 0; e < n; ++e) {
      std::size_t d = static_cast<std::size_t>(e / 4);
      if (d >= s.size()) throw std::invalid_argument("Configuration::from_hex: short string");
      c.open[e] = (val(s[d]) >> (e % 4)) & 1;
    }
    return c;
  }
};

enum class BcKind { Free, Wired, Partition };

struct BoundaryCondition {
  BcKind kind = BcKind::Free;
  std::vector<std::vector<int>> blocks;  // for Partition: vertex ids

  static BoundaryCondition free() { return {}; }
  static BoundaryCondition wired() { return {BcKind::Wired, {}}; }
  static BoundaryCondition partition(std::vector<std::vector<int>> blocks) {
    return {BcKind::Partition, std::move(blocks)};
  }
};

// Connectivity substrate shared by the exact enumerator, the sampler and
// the event detectors: a finite weighted multigraph plus its boundary.
struct WeightedView {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> y;
  std::vector<int> boundary;       // vertices eligible for bc identification
  std::vector<int> vertex_ids;     // original vertex ids (when from a graph)
  std::uint64_t graph_version = 0;

  void validate_bc(const BoundaryCondition& bc) const {
    if (bc.kind != BcKind::Partition) return;
    std::vector<char> seen(n, 0);
    for (const auto& blk : bc.blocks)
      for (int v : blk) {
        if (v < 0 || v >= n) throw std::invalid_argument("boundary partition: vertex out of range");
        if (seen[v]) throw std::invalid_argument("boundary partition: blocks not disjoint");
        seen[v] = 1;
      }
    for (int v : boundary)
      if (!seen[v]) throw std::invalid_argument("boundary partition: does not cover boundary");
  }
};

enum class Color { Primal, Dual };

// Measure bundle: model parameters, boundary condition and the per-edge
// isoradial weights of a concrete graph.
struct MeasureSpec {
  ModelParams params;
  BoundaryCondition bc;
  WeightedView view;

  void validate() const {
    params.validate();
    view.validate_bc(bc);
    for (double w : view.y)
      if (!(w > 0.0)) throw std::invalid_argument("MeasureSpec: edge weight not positive");
  }
};

// Dense view of an isoradial graph for one colour.  Edge e of the view is
// edge e of the graph; y carries the isoradial weight at the given params
// (the dual view uses the complementary angle and inverted beta).
inline WeightedView make_view(const IsoradialGraph& g, const ModelParams& params,
                              Color color = Color::Primal) {
  WeightedView view;
  view.graph_version = g.version;
  bool primal = color == Color::Primal;
  std::vector<int> dense(g.vertex_count(), -1);
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.verts[v].primal == primal) {
      dense[v] = view.n++;
      view.vertex_ids.push_back(v);
    }
  view.edges.reserve(g.edge_count());
  view.y.reserve(g.edge_count());
  for (int r = 0; r < g.edge_count(); ++r) {
    auto [u, v] = primal ? g.primal_edge(r) : g.dual_edge(r);
    view.edges.emplace_back(dense[u], dense[v]);
    double th = g.theta(r);
    view.y.push_back(primal ? edge_weight(th, params).y
                            : dual_edge_weight(th, params).y);
  }
  for (int v : g.boundary_vertices(primal)) view.boundary.push_back(dense[v]);
  return view;
}

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n), size_(n, 1), count_(n) {
    for (int i = 0; i < n; ++i) parent_[i] = i;
  }
  int find(int p) {
    int root = p;
    while (root != parent_[root]) root = parent_[root];
    while (p != root) {
      int next = parent_[p];
      parent_[p] = root;
      p = next;
    }
    return root;
  }
  void merge(int a, int b) {
    int ra = find(a), rb = find(b);
    if (ra == rb) return;
    if (size_[ra] < size_[rb]) std::swap(ra, rb);
    parent_[rb] = ra;
    size_[ra] += size_[rb];
    --count_;
  }
  bool connected(int a, int b) { return find(a) == find(b); }
  int count() const { return count_; }

 private:
  std::vector<int> parent_, size_;
  int count_;
};

namespace detail {

inline UnionFind components(const WeightedView& view, const Configuration& config,
                            const BoundaryCondition& bc) {
  view.validate_bc(bc);
  UnionFind uf(view.n);
  for (int e = 0; e < static_cast<int>(view.edges.size()); ++e)
    if (config.is_open(e)) uf.merge(view.edges[e].first, view.edges[e].second);
  if (bc.kind == BcKind::Wired) {
    for (std::size_t i = 1; i < view.boundary.size(); ++i)
      uf.merge(view.boundary[0], view.boundary[i]);
  } else if (bc.kind == BcKind::Partition) {
    for (const auto& blk : bc.blocks)
      for (std::size_t i = 1; i < blk.size(); ++i) uf.merge(blk[0], blk[i]);
  }
  return uf;
}

}  // namespace detail

// Number of clusters, components touching one boundary block counted once.
inline int cluster_count(const WeightedView& view, const Configuration& config,
                         const BoundaryCondition& bc) {
  if (config.size() != static_cast<int>(view.edges.size()))
    throw std::invalid_argument("cluster_count: configuration size mismatch");
  auto uf = detail::components(view, config, bc);
  return uf.count();
}

// log of q^k prod y_e
inline double config_log_weight(const WeightedView& view, const Configuration& config,
                                double q, const BoundaryCondition& bc) {
  int k = cluster_count(view, config, bc);
  double lw = k * std::log(q);
  for (int e = 0; e < static_cast<int>(view.edges.size()); ++e)
    if (config.is_open(e)) lw += std::log(view.y[e]);
  return lw;
}

// Exact law on {0,1}^E for small edge counts.
class ExactDistribution {
 public:
  ExactDistribution(const WeightedView& view, double q, const BoundaryCondition& bc,
                    int cap = 24)
      : view_(view), q_(q) {
    int m = static_cast<int>(view.edges.size());
    if (m > cap) throw std::invalid_argument("ExactDistribution: edge count above cap");
    view.validate_bc(bc);
    prob_.resize(std::size_t{1} << m);
    long double total = 0.0L;
    for (std::uint64_t mask = 0; mask < prob_.size(); ++mask) {
      UnionFind uf(view.n);
      long double w = 1.0L;
      for (int e = 0; e < m; ++e)
        if (mask >> e & 1) {
          uf.merge(view.edges[e].first, view.edges[e].second);
          w *= view.y[e];
        }
      if (bc.kind == BcKind::Wired) {
        for (std::size_t i = 1; i < view.boundary.size(); ++i)
          uf.merge(view.boundary[0], view.boundary[i]);
      } else if (bc.kind == BcKind::Partition) {
        for (const auto& blk : bc.blocks)
          for (std::size_t i = 1; i < blk.size(); ++i) uf.merge(blk[0], blk[i]);
      }
      for (int k = 0; k < uf.count(); ++k) w *= q_;
      prob_[mask] = w;
      total += w;
    }
    total_ = total;
    for (auto& p : prob_) p = static_cast<long double>(p / total);
  }

  // unnormalised total weight sum_omega q^k prod y
  long double partition_function() const { return total_; }

  // unnormalised weight of an event
  long double raw_event_weight(const std::function<bool(std::uint64_t)>& indicator) const {
    long double w = 0.0L;
    for (std::uint64_t mask = 0; mask < prob_.size(); ++mask)
      if (indicator(mask)) w += prob_[mask] * total_;
    return w;
  }

  double prob(std::uint64_t mask) const { return static_cast<double>(prob_[mask]); }
  std::size_t size() const { return prob_.size(); }

  double marginal(int e) const {
    long double p = 0.0L;
    for (std::uint64_t mask = 0; mask < prob_.size(); ++mask)
      if (mask >> e & 1) p += prob_[mask];
    return static_cast<double>(p);
  }

  double event_probability(const std::function<bool(std::uint64_t)>& indicator) const {
    long double p = 0.0L;
    for (std::uint64_t mask = 0; mask < prob_.size(); ++mask)
      if (indicator(mask)) p += prob_[mask];
    return static_cast<double>(p);
  }

  // law of the connection partition of the marked vertices (free labels)
  std::map<std::vector<int>, double> connection_law(const std::vector<int>& marked) const {
    std::map<std::vector<int>, double> law;
    int m = static_cast<int>(view_.edges.size());
    for (std::uint64_t mask = 0; mask < prob_.size(); ++mask) {
      UnionFind uf(view_.n);
      for (int e = 0; e < m; ++e)
        if (mask >> e & 1) uf.merge(view_.edges[e].first, view_.edges[e].second);
      law[partition_signature(uf, marked)] += prob(mask);
    }
    return law;
  }

  static std::vector<int> partition_signature(UnionFind& uf, const std::vector<int>& marked) {
    std::vector<int> sig(marked.size(), -1);
    std::map<int, int> relabel;
    for (std::size_t i = 0; i < marked.size(); ++i) {
      int root = uf.find(marked[i]);
      auto [it, fresh] = relabel.try_emplace(root, static_cast<int>(relabel.size()));
      sig[i] = it->second;
    }
    return sig;
  }

 private:
  WeightedView view_;
  double q_;
  long double total_ = 0.0L;
  std::vector<long double> prob_;
};

// Single-bond heat-bath dynamics.  The conditional law of an edge given
// the rest is p_e when its endpoints are connected off the edge and
// y/(y+q) otherwise; boundary identifications act as free connections.
class HeatBathSampler {
 public:
  HeatBathSampler(const WeightedView& view, double q, const BoundaryCondition& bc,
                  std::uint64_t shuffle_seed)
      : view_(view), q_(q) {
    if (!(q >= 1.0)) throw std::invalid_argument("HeatBathSampler: require q >= 1");
    view.validate_bc(bc);
    int m = static_cast<int>(view.edges.size());
    adj_head_.assign(view.n, -1);
    adj_next_.assign(2 * m, -1);
    adj_vertex_.assign(2 * m, -1);
    adj_edge_.assign(2 * m, -1);
    for (int e = 0; e < m; ++e) {
      add_arc(2 * e, view.edges[e].first, view.edges[e].second, e);
      add_arc(2 * e + 1, view.edges[e].second, view.edges[e].first, e);
    }
    block_of_.assign(view.n, -1);
    if (bc.kind == BcKind::Wired) {
      blocks_.push_back(view.boundary);
      for (int v : view.boundary) block_of_[v] = 0;
    } else if (bc.kind == BcKind::Partition) {
      for (const auto& blk : bc.blocks) {
        for (int v : blk) block_of_[v] = static_cast<int>(blocks_.size());
        blocks_.push_back(blk);
      }
    }
    order_.resize(m);
    for (int e = 0; e < m; ++e) order_[e] = e;
    Rng shuffler(shuffle_seed);
    shuffler.shuffle(order_);
    visited_.assign(view.n, 0);
    block_visited_.assign(blocks_.size(), 0);
    epoch_ = 0;
  }

  // one pass over all edges in the fixed seeded shuffle
  void sweep(Configuration& config, Rng& rng) {
    for (int e : order_) {
      double p_open;
      if (!std::isfinite(view_.y[e]))
        p_open = 1.0;  // p_e = 1 edges stay open
      else if (connected_off_edge(config, e))
        p_open = view_.y[e] / (1.0 + view_.y[e]);
      else
        p_open = view_.y[e] / (view_.y[e] + q_);
      config.open[e] = rng.bernoulli(p_open) ? 1 : 0;
    }
  }

  bool connected_off_edge(const Configuration& config, int e) {
    int src = view_.edges[e].first, dst = view_.edges[e].second;
    if (src == dst) return true;
    ++epoch_;
    stack_.clear();
    visit_vertex(src);
    while (!stack_.empty()) {
      int v = stack_.back();
      stack_.pop_back();
      if (v == dst) return true;
      for (int arc = adj_head_[v]; arc != -1; arc = adj_next_[arc]) {
        if (adj_edge_[arc] == e || !config.is_open(adj_edge_[arc])) continue;
        int w = adj_vertex_[arc];
        if (visited_[w] != epoch_) {
          if (w == dst) return true;
          visit_vertex(w);
        }
      }
    }
    return false;
  }

 private:
  void add_arc(int arc, int from, int to, int e) {
    adj_vertex_[arc] = to;
    adj_edge_[arc] = e;
    adj_next_[arc] = adj_head_[from];
    adj_head_[from] = arc;
  }

  void visit_vertex(int v) {
    if (visited_[v] == epoch_) return;
    visited_[v] = epoch_;
    stack_.push_back(v);
    int b = block_of_[v];
    if (b >= 0 && block_visited_[b] != epoch_) {
      block_visited_[b] = epoch_;
      for (int w : blocks_[b])
        if (visited_[w] != epoch_) {
          visited_[w] = epoch_;
          stack_.push_back(w);
        }
    }
  }

  WeightedView view_;
  double q_;
  std::vector<int> adj_head_, adj_next_, adj_vertex_, adj_edge_;
  std::vector<std::vector<int>> blocks_;
  std::vector<int> block_of_;
  std::vector<int> order_;
  std::vector<std::uint64_t> visited_, block_visited_;
  std::uint64_t epoch_ = 0;
  std::vector<int> stack_;
};

struct SamplerSettings {
  int sweeps = 1;
  int burn_in = 100;
  int replicas = 64;
  std::uint64_t master_seed = 0;
};

// burn_in + sweeps passes from the all-closed state
inline Configuration sample_heat_bath(const WeightedView& view, double q,
                                      const BoundaryCondition& bc, int sweeps,
                                      Rng& rng, int burn_in = 100) {
  HeatBathSampler sampler(view, q, bc, 0x5eedf00dULL);
  Configuration config = Configuration::zeros(static_cast<int>(view.edges.size()),
                                              view.graph_version);
  for (int s = 0; s < burn_in + sweeps; ++s) sampler.sweep(config, rng);
  return config;
}

// omega*(e*) = 1 - omega(e)
inline Configuration dual_config(const Configuration& config) {
  Configuration dual = config;
  for (auto& bit : dual.open) bit = bit ? 0 : 1;
  return dual;
}

}  // namespace isorc

#endif
