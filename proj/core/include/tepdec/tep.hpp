#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tepdec/bits.hpp"

namespace tepdec {

// Test error pattern: strictly increasing 1-based positions of the bits that
// get flipped in the first k hard decisions before re-encoding.
struct Tep {
  std::vector<unsigned> indices;

  static Tep root() { return {}; }
  std::size_t weight() const { return indices.size(); }
  bool is_root() const { return indices.empty(); }
  unsigned last() const { return indices.back(); }

  bool operator==(const Tep&) const = default;

  BitVector to_bits(std::size_t k) const;
  static Tep from_bits(const BitVector& bits);
  std::uint64_t to_mask() const;  // bit i-1 set for index i; needs indices <= 64
  std::string to_string() const;  // "{}" or "{3,4,5}"
};

struct TreeParams {
  unsigned k = 0;  // information length
  unsigned m = 0;  // maximum pattern weight
};

// Throws std::invalid_argument unless t is strictly increasing over [1, k]
// with weight <= m.
void validate(const Tep& t, const TreeParams& p);

enum class Action : unsigned { extend = 0, adjacent = 1 };
const char* action_name(Action a);

struct TepChildren {
  std::optional<Tep> extended;  // indices plus {k}
  std::optional<Tep> adjacent;  // last index decremented
};

// The extended child exists while the weight budget allows and k is free;
// the adjacent child exists while the last index can step down without
// colliding with its left neighbor or leaving [1, k].
TepChildren children(const Tep& t, const TreeParams& p);

// Inverse of children(): the unique parent and the action that reaches t
// from it. nullopt for the root.
std::optional<std::pair<Tep, Action>> parent_of(const Tep& t, const TreeParams& p);

// Edge count of the unique root path: weight*(k+1) - sum(indices).
unsigned depth_of(const Tep& t, const TreeParams& p);

// Deepest node is {1..m}: m(2k - m + 1)/2.
unsigned max_depth(const TreeParams& p);

// Node count: sum_{i<=m} C(k, i).
std::uint64_t tree_size(const TreeParams& p);

enum class ReachRule {
  // Default: a node also reaches targets that extend it exactly (equal last
  // index, strictly larger weight).
  allow_equal_tail,
  // Ablation: the tail comparison is strictly greater-than only.
  strict_tail,
};

bool reachable(const Tep& from, const Tep& target, const TreeParams& p,
               ReachRule rule = ReachRule::allow_equal_tail);

// Preorder (node, then extended subtree, then adjacent subtree).
std::vector<Tep> enumerate_all(const TreeParams& p);

// Full tree in one contiguous array, preorder, children linked by Action.
class TepTree {
public:
  static constexpr std::int32_t npos = -1;

  struct Node {
    Tep tep;
    std::int32_t parent = npos;
    std::int32_t child[2] = {npos, npos};
    std::uint32_t depth = 0;
  };

  explicit TepTree(const TreeParams& p);

  const TreeParams& params() const { return params_; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  static constexpr std::size_t root() { return 0; }
  std::optional<std::size_t> find(const Tep& t) const;

private:
  TreeParams params_;
  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, std::size_t> index_;  // mask -> node
};

}  // namespace tepdec
