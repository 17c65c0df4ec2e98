#include "dhjlab/extremal.hpp"

#include "dhjlab/errors.hpp"
#include "dhjlab/rng.hpp"

#include <algorithm>
#include <bitset>
#include <chrono>

namespace dhjlab {

namespace {

constexpr int kMaxPoints = 256;
using Bits = std::bitset<kMaxPoints>;

struct Search {
  int n = 0;
  int points = 0;
  std::vector<std::array<int, 3>> lines;
  std::vector<std::vector<int>> incident;
  std::vector<int> tiebreak;
  Bits best;
  std::size_t best_size = 0;
  std::uint64_t nodes = 0;
  std::chrono::steady_clock::time_point deadline;
  bool timed_out = false;

  // Removes from free every point that would complete a line with two chosen points.
  // Returns false if the chosen set already contains a line.
  bool propagate(const Bits& chosen, Bits& free) const {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& l : lines) {
        int in = 0;
        int open = -1;
        for (int p : l) {
          if (chosen.test(p)) ++in;
          else if (free.test(p)) open = p;
        }
        if (in == 3) return false;
        if (in == 2 && open >= 0) {
          free.reset(open);
          changed = true;
        }
      }
    }
    return true;
  }

  // |chosen| + |free| minus a greedy packing of disjoint constraints on free points.
  std::size_t bound(const Bits& chosen, const Bits& free) const {
    Bits used;
    std::size_t loss = 0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& l : lines) {
        int in = 0;
        int open = 0;
        bool clash = false;
        for (int p : l) {
          if (chosen.test(p)) ++in;
          else if (free.test(p)) {
            ++open;
            if (used.test(p)) clash = true;
          }
        }
        if (clash || in + open != 3) continue;
        if ((pass == 0 && in == 1 && open == 2) || (pass == 1 && in == 0 && open == 3)) {
          for (int p : l) {
            if (free.test(p)) used.set(p);
          }
          ++loss;
        }
      }
    }
    return chosen.count() + free.count() - loss;
  }

  int branch_point(const Bits& chosen, const Bits& free) const {
    int pick = -1;
    int pick_degree = -1;
    for (int v = 0; v < points; ++v) {
      if (!free.test(v)) continue;
      int degree = 0;
      for (int li : incident[v]) {
        bool live = true;
        for (int p : lines[li]) {
          if (p != v && !chosen.test(p) && !free.test(p)) live = false;
        }
        if (live) ++degree;
      }
      if (degree > pick_degree || (degree == pick_degree && tiebreak[v] < tiebreak[pick])) {
        pick = v;
        pick_degree = degree;
      }
    }
    return pick;
  }

  void run(Bits chosen, Bits free) {
    if (timed_out) return;
    if ((++nodes & 1023) == 0 && std::chrono::steady_clock::now() > deadline) {
      timed_out = true;
      return;
    }
    if (!propagate(chosen, free)) return;
    if (chosen.count() > best_size) {
      best = chosen;
      best_size = chosen.count();
    }
    if (free.none()) return;
    if (bound(chosen, free) <= best_size) return;
    const int v = branch_point(chosen, free);
    free.reset(v);
    Bits with = chosen;
    with.set(v);
    run(with, free);
    run(chosen, free);
  }
};

Bits greedy(const Search& s, Rng& rng) {
  std::vector<int> order(s.points);
  for (int i = 0; i < s.points; ++i) order[i] = i;
  rng.shuffle(order);
  Bits chosen;
  Bits free;
  for (int i = 0; i < s.points; ++i) free.set(i);
  for (int v : order) {
    if (!free.test(v)) continue;
    chosen.set(v);
    free.reset(v);
    s.propagate(chosen, free);
  }
  return chosen;
}

}  // namespace

ExtremalResult max_line_free(int n, double budget_seconds, std::uint64_t seed) {
  if (n < 0 || pow3(n) > static_cast<std::uint64_t>(kMaxPoints)) {
    throw InvalidArgument("max_line_free supports 0 <= n <= 5");
  }
  const auto start = std::chrono::steady_clock::now();
  Search s;
  s.n = n;
  s.points = static_cast<int>(pow3(n));
  s.incident.resize(s.points);
  for_each_line(n, [&](std::uint64_t base, std::uint64_t step) {
    const int li = static_cast<int>(s.lines.size());
    s.lines.push_back({static_cast<int>(base), static_cast<int>(base + step), static_cast<int>(base + 2 * step)});
    for (int p : s.lines.back()) s.incident[p].push_back(li);
    return true;
  });
  Rng rng(seed);
  s.tiebreak.resize(s.points);
  for (int i = 0; i < s.points; ++i) s.tiebreak[i] = i;
  rng.shuffle(s.tiebreak);
  for (int r = 0; r < 16; ++r) {
    const Bits g = greedy(s, rng);
    if (g.count() > s.best_size) {
      s.best = g;
      s.best_size = g.count();
    }
  }
  s.deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double>(budget_seconds));
  Bits all;
  for (int i = 0; i < s.points; ++i) all.set(i);
  s.run(Bits(), all);

  ExtremalResult out;
  out.n = n;
  out.size = s.best_size;
  out.witness = CubeSet(n, Side::full);
  for (int i = 0; i < s.points; ++i) {
    if (s.best.test(i)) out.witness.set_cell(i);
  }
  out.optimal = !s.timed_out;
  out.nodes = s.nodes;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

bool verify_certificate(const CubeSet& S, std::uint64_t claimed) {
  return S.side() == Side::full && S.size() == claimed && is_line_free(S);
}

CubeSet extend_by_binary_digit(const CubeSet& S) {
  if (S.side() != Side::full) throw InvalidArgument("expected a full-side set");
  CubeSet out(S.dim() + 1, Side::full);
  for (std::uint64_t c = 0; c < S.cells(); ++c) {
    if (!S.has_cell(c)) continue;
    out.set_cell(3 * c);
    out.set_cell(3 * c + 1);
  }
  return out;
}

}  // namespace dhjlab
