#include "hkl/dag.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

#include "hkl/error.hpp"

namespace hkl {

std::string to_string(const Label& label) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (i) os << ',';
    os << label[i];
  }
  os << ')';
  return os.str();
}

void WeightScheme::validate() const {
  if (!(d_r > 0.0 && d_r <= 1.0)) throw InvalidArgument("d_r must lie in (0, 1]");
  if (!(beta > 1.0)) throw InvalidArgument("beta must be > 1");
}

std::string to_string(DagKind kind) {
  switch (kind) {
    case DagKind::grid: return "grid";
    case DagKind::powerset: return "powerset";
    case DagKind::custom: return "custom";
  }
  return "custom";
}

DagKind parse_dag_kind(const std::string& name) {
  if (name == "grid") return DagKind::grid;
  if (name == "powerset") return DagKind::powerset;
  if (name == "custom") return DagKind::custom;
  throw InvalidArgument("unknown dag kind: " + name);
}

namespace {

// Enumerates the box lo <= v <= hi componentwise in lexicographic order.
template <class F>
void for_each_in_box(const Label& lo, const Label& hi, F&& f) {
  Label cur = lo;
  const std::size_t p = lo.size();
  while (true) {
    f(cur);
    std::size_t i = p;
    while (i > 0) {
      --i;
      if (cur[i] < hi[i]) {
        ++cur[i];
        for (std::size_t k = i + 1; k < p; ++k) cur[k] = lo[k];
        break;
      }
      if (i == 0) return;
    }
    if (p == 0) return;
  }
}

}  // namespace

Dag Dag::grid(int p, int q, std::size_t dense_cap) {
  if (p < 1) throw InvalidArgument("grid DAG requires p >= 1");
  if (q < 1) throw InvalidArgument("grid DAG requires q >= 1");
  Dag dag;
  dag.kind_ = DagKind::grid;
  dag.p_ = p;
  dag.q_ = q;
  dag.dense_cap_ = dense_cap;
  const double count = std::pow(static_cast<double>(q + 1), p);
  dag.dense_ = count <= static_cast<double>(dense_cap);
  if (dag.dense_) {
    dag.vertices_.reserve(static_cast<std::size_t>(count));
    for_each_in_box(Label(p, 0), Label(p, q), [&](const Label& v) { dag.vertices_.push_back(v); });
  }
  return dag;
}

Dag Dag::powerset(int p, std::size_t dense_cap) {
  Dag dag = grid(p, 1, dense_cap);
  dag.kind_ = DagKind::powerset;
  return dag;
}

Dag Dag::custom(std::size_t num_vertices,
                const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  if (num_vertices == 0) throw InvalidArgument("custom DAG requires at least one vertex");
  Dag dag;
  dag.kind_ = DagKind::custom;
  dag.p_ = 1;
  dag.q_ = 0;
  dag.dense_ = true;
  dag.dense_cap_ = std::numeric_limits<std::size_t>::max();
  dag.parents_.assign(num_vertices, {});
  dag.children_.assign(num_vertices, {});
  for (const auto& [from, to] : edges) {
    if (from >= num_vertices || to >= num_vertices)
      throw InvalidArgument("edge references unknown vertex");
    if (from == to) throw InvalidArgument("self loop in custom DAG");
    auto& ch = dag.children_[from];
    if (std::find(ch.begin(), ch.end(), to) != ch.end()) continue;
    ch.push_back(to);
    dag.parents_[to].push_back(from);
  }
  dag.finalize_custom();
  return dag;
}

void Dag::finalize_custom() {
  const std::size_t m = parents_.size();
  // Kahn's algorithm, ties broken by insertion index.
  std::vector<std::size_t> indeg(m);
  for (std::size_t v = 0; v < m; ++v) indeg[v] = parents_[v].size();
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < m; ++v)
    if (indeg[v] == 0) ready.insert(v);
  std::vector<std::size_t> order;
  order.reserve(m);
  while (!ready.empty()) {
    const std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (std::size_t c : children_[v])
      if (--indeg[c] == 0) ready.insert(c);
  }
  if (order.size() != m) throw InvalidArgument("custom graph contains a cycle");

  topo_position_.assign(m, 0);
  vertices_.clear();
  for (std::size_t i = 0; i < m; ++i) {
    topo_position_[order[i]] = i;
    vertices_.push_back(Label{static_cast<int>(order[i])});
  }

  depth_.assign(m, -1);
  std::deque<std::size_t> queue;
  for (std::size_t v = 0; v < m; ++v)
    if (parents_[v].empty()) {
      depth_[v] = 0;
      queue.push_back(v);
    }
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t c : children_[v])
      if (depth_[c] < 0) {
        depth_[c] = depth_[v] + 1;
        queue.push_back(c);
      }
  }

  std::vector<std::size_t> comp(m);
  std::iota(comp.begin(), comp.end(), 0);
  auto find = [&](std::size_t x) {
    while (comp[x] != x) x = comp[x] = comp[comp[x]];
    return x;
  };
  for (std::size_t v = 0; v < m; ++v)
    for (std::size_t c : children_[v]) comp[find(v)] = find(c);
  std::set<std::size_t> reps;
  for (std::size_t v = 0; v < m; ++v) reps.insert(find(v));
  components_ = reps.size();
}

double Dag::num_vertices() const {
  if (is_grid()) return std::pow(static_cast<double>(q_ + 1), p_);
  return static_cast<double>(parents_.size());
}

std::size_t Dag::size() const {
  if (!dense_)
    throw CapacityError("grid with " + std::to_string(num_vertices()) +
                        " vertices exceeds the dense cap");
  return is_grid() ? vertices_.size() : parents_.size();
}

const std::vector<Label>& Dag::vertices() const {
  if (!dense_) throw CapacityError("implicit grid DAG has no materialized vertex list");
  return vertices_;
}

std::size_t Dag::index_of(const Label& v) const {
  check_vertex(v);
  if (!is_grid()) return static_cast<std::size_t>(v[0]);
  if (!dense_) throw CapacityError("implicit grid DAG has no dense index");
  std::size_t idx = 0;
  for (int x : v) idx = idx * static_cast<std::size_t>(q_ + 1) + static_cast<std::size_t>(x);
  return idx;
}

std::size_t Dag::topo_rank(const Label& v) const {
  check_vertex(v);
  if (!is_grid()) return topo_position_[static_cast<std::size_t>(v[0])];
  std::size_t sum = 0;
  for (int x : v) sum += static_cast<std::size_t>(x);
  return sum;
}

bool Dag::contains(const Label& v) const {
  if (is_grid()) {
    if (v.size() != static_cast<std::size_t>(p_)) return false;
    return std::all_of(v.begin(), v.end(), [&](int x) { return x >= 0 && x <= q_; });
  }
  return v.size() == 1 && v[0] >= 0 && static_cast<std::size_t>(v[0]) < parents_.size();
}

void Dag::check_vertex(const Label& v) const {
  if (!contains(v)) throw InvalidArgument("unknown vertex " + to_string(v));
}

std::vector<Label> Dag::parents(const Label& v) const {
  check_vertex(v);
  std::vector<Label> out;
  if (is_grid()) {
    for (int i = 0; i < p_; ++i)
      if (v[i] > 0) {
        Label u = v;
        --u[i];
        out.push_back(std::move(u));
      }
    std::sort(out.begin(), out.end());
    return out;
  }
  for (std::size_t u : parents_[v[0]]) out.push_back(Label{static_cast<int>(u)});
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Label> Dag::children(const Label& v) const {
  check_vertex(v);
  std::vector<Label> out;
  if (is_grid()) {
    for (int i = 0; i < p_; ++i)
      if (v[i] < q_) {
        Label u = v;
        ++u[i];
        out.push_back(std::move(u));
      }
    std::sort(out.begin(), out.end());
    return out;
  }
  for (std::size_t u : children_[v[0]]) out.push_back(Label{static_cast<int>(u)});
  std::sort(out.begin(), out.end());
  return out;
}

int Dag::depth(const Label& v) const {
  check_vertex(v);
  if (is_grid()) return std::accumulate(v.begin(), v.end(), 0);
  return depth_[v[0]];
}

std::vector<Label> Dag::roots() const {
  if (is_grid()) return {Label(p_, 0)};
  std::vector<Label> out;
  for (std::size_t v = 0; v < parents_.size(); ++v)
    if (parents_[v].empty()) out.push_back(Label{static_cast<int>(v)});
  return out;
}

std::size_t Dag::max_out_degree() const {
  if (is_grid()) return static_cast<std::size_t>(p_);
  std::size_t best = 0;
  for (const auto& ch : children_) best = std::max(best, ch.size());
  return best;
}

std::size_t Dag::num_components() const { return is_grid() ? 1 : components_; }

VertexSet Dag::ancestors(const Label& v) const {
  check_vertex(v);
  VertexSet out;
  if (is_grid()) {
    for_each_in_box(Label(p_, 0), v, [&](const Label& u) { out.insert(u); });
    return out;
  }
  std::vector<std::size_t> stack{static_cast<std::size_t>(v[0])};
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    if (!out.insert(Label{static_cast<int>(u)}).second) continue;
    for (std::size_t w : parents_[u]) stack.push_back(w);
  }
  return out;
}

double Dag::num_descendants(const Label& v) const {
  check_vertex(v);
  if (is_grid()) {
    double count = 1.0;
    for (int x : v) count *= static_cast<double>(q_ - x + 1);
    return count;
  }
  return static_cast<double>(descendants(v).size());
}

VertexSet Dag::descendants(const Label& v) const {
  check_vertex(v);
  VertexSet out;
  if (is_grid()) {
    if (num_descendants(v) > static_cast<double>(dense_cap_))
      throw CapacityError("descendant set of " + to_string(v) + " exceeds the dense cap");
    for_each_in_box(v, Label(p_, q_), [&](const Label& u) { out.insert(u); });
    return out;
  }
  std::vector<std::size_t> stack{static_cast<std::size_t>(v[0])};
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    if (!out.insert(Label{static_cast<int>(u)}).second) continue;
    for (std::size_t w : children_[u]) stack.push_back(w);
  }
  return out;
}

VertexSet Dag::hull(const VertexSet& w) const {
  VertexSet out;
  // Walk parents from each member; stop at vertices already included since
  // their ancestors are then included as well.
  std::vector<Label> stack(w.begin(), w.end());
  while (!stack.empty()) {
    Label u = std::move(stack.back());
    stack.pop_back();
    if (out.count(u)) continue;
    for (auto& par : parents(u))
      if (!out.count(par)) stack.push_back(std::move(par));
    out.insert(std::move(u));
  }
  return out;
}

bool Dag::is_hull_closed(const VertexSet& w) const {
  for (const auto& v : w)
    for (const auto& par : parents(v))
      if (!w.count(par)) return false;
  return true;
}

VertexSet Dag::sources_of(const VertexSet& w) const {
  VertexSet out;
  for (const auto& v : w) {
    const auto pars = parents(v);
    if (std::none_of(pars.begin(), pars.end(), [&](const Label& u) { return w.count(u) > 0; }))
      out.insert(v);
  }
  return out;
}

VertexSet Dag::sinks_of(const VertexSet& w) const {
  const VertexSet h = hull(w);
  VertexSet out;
  for (const auto& v : h) {
    const auto ch = children(v);
    if (std::none_of(ch.begin(), ch.end(), [&](const Label& u) { return h.count(u) > 0; }))
      out.insert(v);
  }
  return out;
}

VertexSet Dag::complement_sources(const VertexSet& w) const {
  VertexSet candidates;
  for (const auto& r : roots())
    if (!w.count(r)) candidates.insert(r);
  for (const auto& v : w)
    for (auto& c : children(v))
      if (!w.count(c)) candidates.insert(std::move(c));
  VertexSet out;
  for (const auto& t : candidates) {
    const auto pars = parents(t);
    if (std::all_of(pars.begin(), pars.end(), [&](const Label& u) { return w.count(u) > 0; }))
      out.insert(t);
  }
  return out;
}

VertexSet Dag::complement(const VertexSet& w) const {
  VertexSet out;
  for (const auto& v : vertices())
    if (!w.count(v)) out.insert(v);
  return out;
}

double gamma_constant(const Dag& dag, const WeightScheme& weights) {
  if (!(weights.beta > 1.0)) throw InvalidArgument("gamma_constant requires beta > 1");
  const double num = static_cast<double>(dag.num_components());
  const double deg = static_cast<double>(dag.max_out_degree() + 1);
  const double shrink = 1.0 - 1.0 / weights.beta;
  const double lb = std::log(weights.beta);
  return 4.0 * std::log(2.0 * num) / (shrink * shrink) + 4.0 * std::log(deg) / (lb * lb * lb);
}

}  // namespace hkl
