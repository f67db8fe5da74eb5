#pragma once

#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace hkl {

/// Vertex label. Grid DAGs use the p-tuple of per-dimension orders; custom
/// DAGs use a one-element tuple holding the insertion index.
using Label = std::vector<int>;

/// Ordered vertex set; lexicographic order keeps every traversal deterministic.
using VertexSet = std::set<Label>;

std::string to_string(const Label& label);

/// Weights d_v of the structured norm: d_r on sources, beta^depth elsewhere.
struct WeightScheme {
  double d_r = 1.0;
  double beta = 2.0;

  void validate() const;
  double weight(int depth) const { return depth == 0 ? d_r : std::pow(beta, depth); }
};

enum class DagKind { grid, powerset, custom };

std::string to_string(DagKind kind);
DagKind parse_dag_kind(const std::string& name);

/// Directed acyclic graph of kernel indices.
///
/// Grid DAGs over {0..q}^p are implicit: parents, children and depths are
/// computed arithmetically from labels, and the vertex list is only
/// materialized when (q+1)^p does not exceed the dense cap. Custom DAGs are
/// always explicit. Instances are immutable and safe to share across threads.
class Dag {
 public:
  static constexpr std::size_t kDefaultDenseCap = std::size_t{1} << 20;

  static Dag grid(int p, int q, std::size_t dense_cap = kDefaultDenseCap);
  static Dag powerset(int p, std::size_t dense_cap = kDefaultDenseCap);
  /// Explicit DAG on vertices {0..num_vertices-1}; edges are (parent, child).
  static Dag custom(std::size_t num_vertices,
                    const std::vector<std::pair<std::size_t, std::size_t>>& edges);
  static Dag edgeless(std::size_t num_vertices) { return custom(num_vertices, {}); }

  DagKind kind() const { return kind_; }
  bool is_grid() const { return kind_ != DagKind::custom; }
  int p() const { return p_; }
  int q() const { return q_; }

  /// Total vertex count as a double; exact up to 2^53, finite for 4^256.
  double num_vertices() const;
  bool is_dense() const { return dense_; }
  /// Dense vertex count; throws CapacityError for implicit grids.
  std::size_t size() const;
  /// All vertices in topological order (lexicographic for grids).
  const std::vector<Label>& vertices() const;
  std::size_t index_of(const Label& v) const;
  /// A rank that strictly increases along every edge.
  std::size_t topo_rank(const Label& v) const;

  bool contains(const Label& v) const;
  std::vector<Label> parents(const Label& v) const;
  std::vector<Label> children(const Label& v) const;
  /// Length of the shortest path from a source.
  int depth(const Label& v) const;
  double weight(const Label& v, const WeightScheme& ws) const { return ws.weight(depth(v)); }

  std::vector<Label> roots() const;
  std::size_t max_out_degree() const;
  /// Number of weakly connected components.
  std::size_t num_components() const;

  VertexSet ancestors(const Label& v) const;
  /// Throws CapacityError when the descendant set exceeds the dense cap.
  VertexSet descendants(const Label& v) const;
  double num_descendants(const Label& v) const;

  VertexSet hull(const VertexSet& w) const;
  bool is_hull_closed(const VertexSet& w) const;
  VertexSet sources_of(const VertexSet& w) const;
  VertexSet sinks_of(const VertexSet& w) const;
  /// sources(V \ w): vertices outside w whose parents all lie in w.
  VertexSet complement_sources(const VertexSet& w) const;
  /// Dense only.
  VertexSet complement(const VertexSet& w) const;

  std::size_t dense_cap() const { return dense_cap_; }

 private:
  Dag() = default;
  void check_vertex(const Label& v) const;
  void finalize_custom();

  DagKind kind_ = DagKind::custom;
  int p_ = 0;
  int q_ = 0;
  bool dense_ = true;
  std::size_t dense_cap_ = kDefaultDenseCap;
  std::vector<Label> vertices_;
  // custom DAGs only, indexed by vertex id
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<int> depth_;
  std::vector<std::size_t> topo_position_;
  std::size_t components_ = 1;
};

/// gamma(V) = 4 log(2 num(V)) / (1 - 1/beta)^2 + 4 log deg(V) / (log beta)^3,
/// with num(V) the weakly connected component count and deg(V) the maximum
/// out-degree plus one.
double gamma_constant(const Dag& dag, const WeightScheme& weights);

}  // namespace hkl
