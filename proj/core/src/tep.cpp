#include "tepdec/tep.hpp"

#include <stdexcept>

namespace tepdec {

BitVector Tep::to_bits(std::size_t k) const {
  BitVector b(k);
  for (unsigned idx : indices) {
    if (idx < 1 || idx > k) throw std::invalid_argument("index out of range");
    b.set(idx - 1, true);
  }
  return b;
}

Tep Tep::from_bits(const BitVector& bits) {
  Tep t;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits.get(i)) t.indices.push_back(static_cast<unsigned>(i + 1));
  return t;
}

std::uint64_t Tep::to_mask() const {
  std::uint64_t m = 0;
  for (unsigned idx : indices) {
    if (idx < 1 || idx > 64) throw std::invalid_argument("index out of range for mask");
    m |= std::uint64_t{1} << (idx - 1);
  }
  return m;
}

std::string Tep::to_string() const {
  std::string s = "{";
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(indices[i]);
  }
  return s + "}";
}

void validate(const Tep& t, const TreeParams& p) {
  if (t.weight() > p.m) throw std::invalid_argument("pattern weight exceeds m");
  unsigned prev = 0;
  for (unsigned idx : t.indices) {
    if (idx < 1 || idx > p.k) throw std::invalid_argument("index out of [1, k]");
    if (idx <= prev) throw std::invalid_argument("indices must strictly increase");
    prev = idx;
  }
}

const char* action_name(Action a) { return a == Action::extend ? "extend" : "adjacent"; }

TepChildren children(const Tep& t, const TreeParams& p) {
  TepChildren c;
  const bool k_free = t.is_root() || t.last() != p.k;
  if (k_free && t.weight() < p.m) {
    Tep ext = t;
    ext.indices.push_back(p.k);
    c.extended = std::move(ext);
  }
  if (!t.is_root() && t.last() > 1) {
    const std::size_t w = t.weight();
    if (w == 1 || t.last() - 1 > t.indices[w - 2]) {
      Tep adj = t;
      --adj.indices.back();
      c.adjacent = std::move(adj);
    }
  }
  return c;
}

std::optional<std::pair<Tep, Action>> parent_of(const Tep& t, const TreeParams& p) {
  if (t.is_root()) return std::nullopt;
  Tep parent = t;
  if (t.last() == p.k) {
    parent.indices.pop_back();
    return std::pair{std::move(parent), Action::extend};
  }
  ++parent.indices.back();
  return std::pair{std::move(parent), Action::adjacent};
}

unsigned depth_of(const Tep& t, const TreeParams& p) {
  validate(t, p);
  unsigned sum = 0;
  for (unsigned idx : t.indices) sum += idx;
  return static_cast<unsigned>(t.weight()) * (p.k + 1) - sum;
}

unsigned max_depth(const TreeParams& p) {
  if (p.m > p.k) throw std::invalid_argument("m > k");
  return p.m * (2 * p.k - p.m + 1) / 2;
}

std::uint64_t tree_size(const TreeParams& p) {
  if (p.m > p.k) throw std::invalid_argument("m > k");
  unsigned __int128 total = 0;
  for (unsigned i = 0; i <= p.m; ++i) {
    unsigned __int128 c = 1;
    for (unsigned j = 1; j <= i; ++j) c = c * (p.k - j + 1) / j;
    total += c;
    if (total > UINT64_MAX) throw std::overflow_error("tree size exceeds 2^64");
  }
  return static_cast<std::uint64_t>(total);
}

bool reachable(const Tep& from, const Tep& target, const TreeParams& p, ReachRule rule) {
  validate(from, p);
  validate(target, p);
  if (from == target) return true;
  if (from.is_root()) return true;
  const std::size_t l = from.weight(), lt = target.weight();
  if (l > lt) return false;
  for (std::size_t i = 0; i + 1 < l; ++i)
    if (from.indices[i] != target.indices[i]) return false;
  const unsigned z = from.indices[l - 1], zt = target.indices[l - 1];
  if (z > zt) return true;
  return rule == ReachRule::allow_equal_tail && z == zt && l < lt;
}

namespace {

template <typename Visit>
void walk_preorder(const TreeParams& p, Visit&& visit) {
  // Explicit stack; preorder with the extended child first.
  std::vector<Tep> stack;
  stack.push_back(Tep::root());
  while (!stack.empty()) {
    Tep t = std::move(stack.back());
    stack.pop_back();
    auto c = children(t, p);
    visit(t);
    if (c.adjacent) stack.push_back(std::move(*c.adjacent));
    if (c.extended) stack.push_back(std::move(*c.extended));
  }
}

}  // namespace

std::vector<Tep> enumerate_all(const TreeParams& p) {
  if (p.m > p.k) throw std::invalid_argument("m > k");
  std::vector<Tep> out;
  out.reserve(tree_size(p));
  walk_preorder(p, [&](const Tep& t) { out.push_back(t); });
  return out;
}

TepTree::TepTree(const TreeParams& p) : params_(p) {
  if (p.m > p.k) throw std::invalid_argument("m > k");
  const std::uint64_t count = tree_size(p);
  nodes_.reserve(count);
  index_.reserve(count);
  // Preorder build: stack carries (tep, parent index, action from parent).
  struct Item {
    Tep tep;
    std::int32_t parent;
    Action action;
  };
  std::vector<Item> stack;
  stack.push_back({Tep::root(), npos, Action::extend});
  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    const auto idx = static_cast<std::int32_t>(nodes_.size());
    Node node;
    node.tep = it.tep;
    node.parent = it.parent;
    if (it.parent != npos) {
      nodes_[it.parent].child[static_cast<unsigned>(it.action)] = idx;
      node.depth = nodes_[it.parent].depth + 1;
    }
    index_.emplace(node.tep.to_mask(), idx);
    auto c = children(node.tep, params_);
    nodes_.push_back(std::move(node));
    if (c.adjacent) stack.push_back({std::move(*c.adjacent), idx, Action::adjacent});
    if (c.extended) stack.push_back({std::move(*c.extended), idx, Action::extend});
  }
}

std::optional<std::size_t> TepTree::find(const Tep& t) const {
  auto it = index_.find(t.to_mask());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace tepdec
