#include "arp/memo.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>

namespace arp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SolutionTrie::Value SolutionTrie::evaluate(const std::vector<int>& sequence,
                                           int multi) {
  if (sequence.empty() || sequence[0] != 0) {
    throw std::invalid_argument("trie: sequences start at Earth (0)");
  }
  Node* node = &root_;
  for (std::size_t k = 1; k < sequence.size(); ++k) {
    const int label = sequence[k];
    auto it = node->children.find(label);
    if (it == node->children.end()) {
      auto child = std::make_unique<Node>();
      child->label = label;
      if (!node->feasible) {
        child->cost = kInf;
        child->est = node->est;
        child->leg_cost = kInf;
        child->feasible = false;
      } else {
        TransferQuery q;
        q.from = node->label < 0 ? 0 : node->label;
        q.to = label;
        q.eta = node->est;
        q.tau_max = tau_max_;
        q.t_max = t_max_;
        q.multi = multi;
        const TransferResult leg = evaluator_->best_transfer(q);
        child->feasible = leg.feasible;
        child->leg_cost = leg.z;
        child->cost = node->cost + leg.z;
        child->est = leg.feasible ? node->est + leg.tau + leg.t : node->est;
      }
      it = node->children.emplace(label, std::move(child)).first;
      ++node_count_;
    }
    node = it->second.get();
  }
  return Value{node->cost, node->est, node->feasible};
}

const SolutionTrie::Node* SolutionTrie::lookup(
    const std::vector<int>& sequence) const {
  if (sequence.empty() || sequence[0] != 0) return nullptr;
  const Node* node = &root_;
  for (std::size_t k = 1; k < sequence.size(); ++k) {
    auto it = node->children.find(sequence[k]);
    if (it == node->children.end()) return nullptr;
    node = it->second.get();
  }
  return node;
}

namespace {

void append_raw(std::string& out, const void* data, std::size_t size) {
  out.append(static_cast<const char*>(data), size);
}

template <typename T>
void append_pod(std::string& out, const T& value) {
  append_raw(out, &value, sizeof(T));
}

template <typename T>
T read_pod(const std::string& in, std::size_t& cursor) {
  if (cursor + sizeof(T) > in.size()) {
    throw std::runtime_error("memo snapshot: truncated record");
  }
  T value;
  std::memcpy(&value, in.data() + cursor, sizeof(T));
  cursor += sizeof(T);
  return value;
}

void save_trie_node(std::string& out, const SolutionTrie::Node& node) {
  append_pod(out, std::int32_t{node.label});
  append_pod(out, node.cost);
  append_pod(out, node.est);
  append_pod(out, node.leg_cost);
  append_pod(out, static_cast<std::uint8_t>(node.feasible ? 1 : 0));
  append_pod(out, std::uint32_t(node.children.size()));
  for (const auto& [label, child] : node.children) save_trie_node(out, *child);
}

void load_trie_node(const std::string& in, std::size_t& cursor,
                    SolutionTrie::Node& node, std::int64_t& count) {
  node.label = read_pod<std::int32_t>(in, cursor);
  node.cost = read_pod<double>(in, cursor);
  node.est = read_pod<double>(in, cursor);
  node.leg_cost = read_pod<double>(in, cursor);
  node.feasible = read_pod<std::uint8_t>(in, cursor) != 0;
  const auto n_children = read_pod<std::uint32_t>(in, cursor);
  for (std::uint32_t k = 0; k < n_children; ++k) {
    auto child = std::make_unique<SolutionTrie::Node>();
    load_trie_node(in, cursor, *child, count);
    ++count;
    const int label = child->label;
    node.children.emplace(label, std::move(child));
  }
}

}  // namespace

void SolutionTrie::save(std::string& out) const { save_trie_node(out, root_); }

void SolutionTrie::load(const std::string& in) {
  root_ = Node{};
  node_count_ = 0;
  std::size_t cursor = 0;
  load_trie_node(in, cursor, root_, node_count_);
  if (cursor != in.size()) {
    throw std::runtime_error("memo snapshot: trailing bytes in trie record");
  }
}

void BoundIntervalTree::pull(Node* node) {
  node->subtree_min_lo = node->lo;
  node->subtree_max_hi = node->hi;
  for (const Node* child : {node->left.get(), node->right.get()}) {
    if (!child) continue;
    node->subtree_min_lo = std::min(node->subtree_min_lo, child->subtree_min_lo);
    node->subtree_max_hi = std::max(node->subtree_max_hi, child->subtree_max_hi);
  }
}

void BoundIntervalTree::insert(double lo, double hi, double value) {
  if (!(lo <= hi)) throw std::invalid_argument("interval tree: lo > hi");

  // xorshift for heap priorities; deterministic per tree.
  prio_state_ ^= prio_state_ << 13;
  prio_state_ ^= prio_state_ >> 7;
  prio_state_ ^= prio_state_ << 17;

  auto fresh = std::make_unique<Node>();
  fresh->lo = lo;
  fresh->hi = hi;
  fresh->value = value;
  fresh->priority = prio_state_;
  fresh->subtree_min_lo = lo;
  fresh->subtree_max_hi = hi;

  // Split by key (lo, hi), then join around the new node.
  const auto key_less = [](const Node& a, const Node& b) {
    if (a.lo != b.lo) return a.lo < b.lo;
    return a.hi < b.hi;
  };

  std::function<void(std::unique_ptr<Node>, const Node&, std::unique_ptr<Node>&,
                     std::unique_ptr<Node>&)>
      split = [&](std::unique_ptr<Node> node, const Node& key,
                  std::unique_ptr<Node>& left, std::unique_ptr<Node>& right) {
        if (!node) {
          left = nullptr;
          right = nullptr;
          return;
        }
        if (key_less(*node, key)) {
          split(std::move(node->right), key, node->right, right);
          left = std::move(node);
          pull(left.get());
        } else {
          split(std::move(node->left), key, left, node->left);
          right = std::move(node);
          pull(right.get());
        }
      };

  std::function<std::unique_ptr<Node>(std::unique_ptr<Node>,
                                      std::unique_ptr<Node>)>
      merge = [&](std::unique_ptr<Node> a,
                  std::unique_ptr<Node> b) -> std::unique_ptr<Node> {
    if (!a) return b;
    if (!b) return a;
    if (a->priority > b->priority) {
      a->right = merge(std::move(a->right), std::move(b));
      pull(a.get());
      return a;
    }
    b->left = merge(std::move(a), std::move(b->left));
    pull(b.get());
    return b;
  };

  std::unique_ptr<Node> left, right;
  split(std::move(root_), *fresh, left, right);
  root_ = merge(merge(std::move(left), std::move(fresh)), std::move(right));
  ++size_;
}

bool BoundIntervalTree::query(double qlo, double qhi, double& value_out) const {
  bool found = false;
  double best = -kInf;
  // A subtree can hold a containing window only if its min start reaches
  // qlo and its max end reaches qhi.
  std::function<void(const Node*)> visit = [&](const Node* node) {
    if (!node) return;
    if (node->subtree_min_lo > qlo || node->subtree_max_hi < qhi) return;
    if (node->lo <= qlo && node->hi >= qhi && node->value > best) {
      best = node->value;
      found = true;
    }
    visit(node->left.get());
    // Right subtree holds keys with lo >= node->lo only.
    if (node->lo <= qlo) visit(node->right.get());
  };
  visit(root_.get());
  if (found) value_out = best;
  return found;
}

void BoundIntervalTree::save(std::string& out) const {
  append_pod(out, std::int64_t{size_});
  std::function<void(const Node*)> walk = [&](const Node* node) {
    if (!node) return;
    walk(node->left.get());
    append_pod(out, node->lo);
    append_pod(out, node->hi);
    append_pod(out, node->value);
    walk(node->right.get());
  };
  walk(root_.get());
}

void BoundIntervalTree::load(const std::string& in) {
  root_.reset();
  size_ = 0;
  prio_state_ = 0x9E3779B97F4A7C15ull;
  std::size_t cursor = 0;
  const auto count = read_pod<std::int64_t>(in, cursor);
  for (std::int64_t k = 0; k < count; ++k) {
    const double lo = read_pod<double>(in, cursor);
    const double hi = read_pod<double>(in, cursor);
    const double value = read_pod<double>(in, cursor);
    insert(lo, hi, value);
  }
  if (cursor != in.size()) {
    throw std::runtime_error("memo snapshot: trailing bytes in tree record");
  }
}

void BoundMemo::insert_bound(int from, int to, double lo, double hi,
                             double value) {
  bounds[{from, to}].insert(lo, hi, value);
}

bool BoundMemo::query_bound(int from, int to, double lo, double hi,
                            double& value_out) const {
  const auto it = bounds.find({from, to});
  if (it == bounds.end()) return false;
  return it->second.query(lo, hi, value_out);
}

namespace {

constexpr char kMagic[4] = {'A', 'R', 'P', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kRecordTrie = 1;
constexpr std::uint8_t kRecordPairTree = 2;

}  // namespace

void BoundMemo::save(const std::string& path) const {
  std::string blob;
  append_raw(blob, kMagic, sizeof(kMagic));
  append_pod(blob, kVersion);

  const auto record = [&blob](std::uint8_t type, const std::string& payload) {
    append_pod(blob, type);
    append_pod(blob, std::uint64_t(payload.size()));
    blob += payload;
  };

  std::string payload;
  trie.save(payload);
  record(kRecordTrie, payload);

  for (const auto& [pair, tree] : bounds) {
    payload.clear();
    append_pod(payload, std::int32_t{pair.first});
    append_pod(payload, std::int32_t{pair.second});
    tree.save(payload);
    record(kRecordPairTree, payload);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(blob.data(), static_cast<std::streamsize>(blob.size()))) {
    throw std::runtime_error("memo snapshot: cannot write " + path);
  }
}

void BoundMemo::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("memo snapshot: cannot open " + path);
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  std::size_t cursor = 0;
  if (blob.size() < sizeof(kMagic) + sizeof(kVersion) ||
      std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("memo snapshot: bad magic");
  }
  cursor += sizeof(kMagic);
  if (read_pod<std::uint32_t>(blob, cursor) != kVersion) {
    throw std::runtime_error("memo snapshot: unsupported version");
  }

  bounds.clear();
  while (cursor < blob.size()) {
    const auto type = read_pod<std::uint8_t>(blob, cursor);
    const auto length = read_pod<std::uint64_t>(blob, cursor);
    if (cursor + length > blob.size()) {
      throw std::runtime_error("memo snapshot: truncated record");
    }
    const std::string payload = blob.substr(cursor, length);
    cursor += length;
    if (type == kRecordTrie) {
      trie.load(payload);
    } else if (type == kRecordPairTree) {
      std::size_t pc = 0;
      const int from = read_pod<std::int32_t>(payload, pc);
      const int to = read_pod<std::int32_t>(payload, pc);
      bounds[{from, to}].load(payload.substr(pc));
    } else {
      throw std::runtime_error("memo snapshot: unknown record type");
    }
  }
}

}  // namespace arp
