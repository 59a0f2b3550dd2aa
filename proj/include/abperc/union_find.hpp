#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace abperc {

// Union-find with path compression and union by size. Scratch state is
// per-trial; reset() reuses the allocation.
class UnionFind {
 public:
  UnionFind() = default;
  explicit UnionFind(std::size_t n) { reset(n); }

  void reset(std::size_t n) {
    parent_.resize(n);
    std::iota(parent_.begin(), parent_.end(), 0);
    size_.assign(n, 1);
  }

  std::int32_t find(std::int32_t x) {
    std::int32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      std::int32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  bool unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  bool same(std::int32_t a, std::int32_t b) { return find(a) == find(b); }
  std::int64_t component_size(std::int32_t a) { return size_[find(a)]; }
  std::size_t count() const { return parent_.size(); }

 private:
  std::vector<std::int32_t> parent_;
  std::vector<std::int64_t> size_;
};

}  // namespace abperc
