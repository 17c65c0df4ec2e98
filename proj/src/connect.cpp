#include "dhjlab/connect.hpp"

#include "dhjlab/errors.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>

namespace dhjlab {

namespace {

bool one_apart(const Word& a, const Word& b) {
  int diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i] && ++diff > 1) return false;
  }
  return diff == 1;
}

struct Dsu {
  explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
  std::vector<std::size_t> parent;
};

}  // namespace

Connectivity is_connected(std::span<const Word> support) {
  if (support.empty()) throw InvalidArgument("connectivity of an empty support");
  const std::size_t m = support.size();
  Connectivity out;
  std::vector<bool> seen(m, false);
  std::queue<std::size_t> queue;
  seen[0] = true;
  queue.push(0);
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop();
    out.side.push_back(u);
    for (std::size_t v = 0; v < m; ++v) {
      if (!seen[v] && one_apart(support[u], support[v])) {
        seen[v] = true;
        out.tree.emplace_back(u, v);
        queue.push(v);
      }
    }
  }
  out.connected = out.side.size() == m;
  if (out.connected) {
    out.side.clear();
  } else {
    out.tree.clear();
    std::sort(out.side.begin(), out.side.end());
  }
  return out;
}

bool check_certificate(std::span<const Word> support, const Connectivity& c) {
  const std::size_t m = support.size();
  if (c.connected) {
    if (c.tree.size() + 1 != m) return false;
    Dsu dsu(m);
    for (auto [a, b] : c.tree) {
      if (a >= m || b >= m || !one_apart(support[a], support[b])) return false;
      if (!dsu.unite(a, b)) return false;
    }
    return true;
  }
  if (c.side.empty() || c.side.size() >= m) return false;
  std::vector<bool> in(m, false);
  for (auto i : c.side) {
    if (i >= m) return false;
    in[i] = true;
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (in[a] && !in[b] && one_apart(support[a], support[b])) return false;
    }
  }
  return true;
}

bool pair_graph_connected(std::span<const Word> pairs, const Alphabet& left, const Alphabet& right) {
  // vertices: left symbols then right symbols
  const std::size_t nl = left.size();
  Dsu dsu(nl + right.size());
  std::size_t components = nl + right.size();
  for (const auto& p : pairs) {
    auto a = std::find(left.begin(), left.end(), p[0]);
    auto b = std::find(right.begin(), right.end(), p[1]);
    if (a == left.end() || b == right.end()) throw InvalidArgument("pair outside the declared alphabets");
    if (dsu.unite(static_cast<std::size_t>(a - left.begin()), nl + static_cast<std::size_t>(b - right.begin()))) {
      --components;
    }
  }
  return components == 1;
}

namespace {

PairwiseConnectivity pairwise(std::span<const Word> support, const std::vector<Alphabet>& alphabets) {
  const std::size_t k = alphabets.size();
  if (k < 2) throw InvalidArgument("pairwise connectivity needs arity at least 2");
  PairwiseConnectivity out;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const std::size_t coords[] = {i, j};
      const auto pairs = project_support(support, coords);
      if (!pair_graph_connected(pairs, alphabets[i], alphabets[j])) {
        out.connected = false;
        out.failing = std::make_pair(i, j);
        return out;
      }
    }
  }
  return out;
}

}  // namespace

PairwiseConnectivity is_pairwise_connected(const JointDist& d) {
  const auto support = d.support();
  return pairwise(support, d.alphabets());
}

PairwiseConnectivity is_pairwise_connected(std::span<const Word> support) {
  if (support.empty()) throw InvalidArgument("empty support");
  std::vector<Alphabet> alphabets(support.front().size());
  for (std::size_t i = 0; i < alphabets.size(); ++i) {
    std::set<std::uint8_t> seen;
    for (const auto& t : support) seen.insert(t[i]);
    alphabets[i].assign(seen.begin(), seen.end());
  }
  return pairwise(support, alphabets);
}

std::vector<Word> project_support(std::span<const Word> support, std::span<const std::size_t> coords) {
  std::set<Word> out;
  for (const auto& t : support) {
    Word p;
    for (auto c : coords) {
      if (c >= t.size()) throw InvalidArgument("coordinate out of range");
      p.push_back(t[c]);
    }
    out.insert(std::move(p));
  }
  return {out.begin(), out.end()};
}

std::vector<ProjectionCheck> check_all_k_minus_1_projections(std::span<const Word> support) {
  if (support.empty()) throw InvalidArgument("empty support");
  const std::size_t k = support.front().size();
  if (k < 3) throw InvalidArgument("projection check needs arity at least 3");
  std::vector<ProjectionCheck> out;
  for (std::size_t drop = 0; drop < k; ++drop) {
    ProjectionCheck check;
    for (std::size_t c = 0; c < k; ++c) {
      if (c != drop) check.coords.push_back(c);
    }
    const auto projected = project_support(support, check.coords);
    check.result = is_connected(projected);
    out.push_back(std::move(check));
  }
  return out;
}

std::vector<ProjectionCheck> check_all_k_minus_1_projections(const JointDist& d) {
  const auto support = d.support();
  return check_all_k_minus_1_projections(support);
}

}  // namespace dhjlab
