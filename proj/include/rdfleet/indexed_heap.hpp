#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace rdfleet {

/// Binary min-heap over items 0..n-1 keyed by a double, with a position map so any
/// item's key can be changed in O(log n). Ties are broken by item index, which keeps
/// event ordering deterministic.
class IndexedMinHeap {
 public:
  IndexedMinHeap() = default;

  /// Build from initial keys in O(n).
  explicit IndexedMinHeap(std::vector<double> keys) : keys_(std::move(keys)), heap_(keys_.size()), pos_(keys_.size()) {
    for (std::size_t i = 0; i < heap_.size(); ++i) {
      heap_[i] = static_cast<std::uint32_t>(i);
      pos_[i] = static_cast<std::uint32_t>(i);
    }
    for (std::size_t i = heap_.size() / 2; i-- > 0;) sift_down(i);
  }

  std::size_t size() const noexcept { return heap_.size(); }
  bool empty() const noexcept { return heap_.empty(); }
  std::uint32_t top() const noexcept { return heap_[0]; }
  double top_key() const noexcept { return keys_[heap_[0]]; }
  double key(std::size_t item) const noexcept { return keys_[item]; }
  std::size_t position(std::size_t item) const noexcept { return pos_[item]; }

  void update(std::size_t item, double key) {
    const double old = keys_[item];
    keys_[item] = key;
    if (key < old) {
      sift_up(pos_[item]);
    } else {
      sift_down(pos_[item]);
    }
  }

  /// Checks the heap order and the position map; for tests.
  bool valid() const {
    for (std::size_t i = 0; i < heap_.size(); ++i) {
      if (pos_[heap_[i]] != i) return false;
      if (i > 0 && less(i, (i - 1) / 2)) return false;
    }
    return true;
  }

 private:
  bool less(std::size_t a, std::size_t b) const noexcept {
    const double ka = keys_[heap_[a]];
    const double kb = keys_[heap_[b]];
    return ka < kb || (ka == kb && heap_[a] < heap_[b]);
  }

  void swap_nodes(std::size_t a, std::size_t b) noexcept {
    std::swap(heap_[a], heap_[b]);
    pos_[heap_[a]] = static_cast<std::uint32_t>(a);
    pos_[heap_[b]] = static_cast<std::uint32_t>(b);
  }

  void sift_up(std::size_t i) noexcept {
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!less(i, parent)) break;
      swap_nodes(i, parent);
      i = parent;
    }
  }

  void sift_down(std::size_t i) noexcept {
    const std::size_t n = heap_.size();
    while (true) {
      std::size_t smallest = i;
      const std::size_t l = 2 * i + 1;
      const std::size_t r = l + 1;
      if (l < n && less(l, smallest)) smallest = l;
      if (r < n && less(r, smallest)) smallest = r;
      if (smallest == i) break;
      swap_nodes(i, smallest);
      i = smallest;
    }
  }

  std::vector<double> keys_;
  std::vector<std::uint32_t> heap_;
  std::vector<std::uint32_t> pos_;
};

}  // namespace rdfleet
