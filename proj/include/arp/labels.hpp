#pragma once

#include <cstdint>
#include <vector>

namespace arp {

/// Small set of body labels (0..capacity-1) on 64-bit blocks.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(int capacity)
      : capacity_(capacity), words_((capacity + 63) / 64, 0) {}

  void insert(int label) { words_[label >> 6] |= 1ull << (label & 63); }
  void erase(int label) { words_[label >> 6] &= ~(1ull << (label & 63)); }
  bool contains(int label) const {
    if (label < 0 || label >= capacity_) return false;
    return (words_[label >> 6] >> (label & 63)) & 1ull;
  }
  void clear() { words_.assign(words_.size(), 0); }

  LabelSet& operator|=(const LabelSet& other) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
    return *this;
  }
  LabelSet& operator&=(const LabelSet& other) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
    return *this;
  }
  friend bool operator==(const LabelSet& a, const LabelSet& b) {
    return a.words_ == b.words_;
  }

  /// this &= (other | {extra}); extra < 0 contributes nothing.
  void intersect_with_plus(const LabelSet& other, int extra) {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t word = other.words_[w];
      if (extra >= 0 && (extra >> 6) == static_cast<int>(w)) {
        word |= 1ull << (extra & 63);
      }
      words_[w] &= word;
    }
  }
  /// this |= (other | {extra}); extra < 0 contributes nothing.
  void union_with_plus(const LabelSet& other, int extra) {
    *this |= other;
    if (extra >= 0) insert(extra);
  }

  int count() const {
    int total = 0;
    for (auto word : words_) total += __builtin_popcountll(word);
    return total;
  }
  int capacity() const { return capacity_; }

  static LabelSet full(int capacity) {
    LabelSet set(capacity);
    for (int label = 0; label < capacity; ++label) set.insert(label);
    return set;
  }

 private:
  int capacity_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace arp
