#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "tepdec/bits.hpp"
#include "tepdec/channel.hpp"
#include "tepdec/linear_code.hpp"
#include "tepdec/policy.hpp"
#include "tepdec/tep.hpp"

namespace tepdec {

struct SearchParams {
  TreeParams tree;
  double c_puct = 1.38;
  unsigned max_steps = 0;  // per-episode descent budget; 0 means max_depth(tree)
  bool classic_mcts = false;  // end each episode after its first expansion
  ReachRule reach_rule = ReachRule::allow_equal_tail;
};

// Per-frame quantities every episode shares: hard decisions of the first k
// received values and the codeword they re-encode to.
struct FrameContext {
  const LinearCode* code = nullptr;
  std::vector<double> r;
  std::vector<double> llr;
  std::vector<double> llr_norm;
  BitVector b0;             // hard decision of the first k values
  BitVector base_codeword;  // encode(b0)
};
FrameContext make_frame_context(const LinearCode& code, std::span<const double> r,
                                std::span<const double> llr);
FrameContext make_frame_context(const LinearCode& code, const ReceivedFrame& frame);

// candidate = (b0 xor tep) G = base_codeword xor sum of tep's generator rows
BitVector tep_candidate(const FrameContext& ctx, const Tep& tep);

struct SearchNode {
  Tep tep;
  ActionMask mask;
  std::uint64_t visits = 1;  // N(s); expansion counts as the first visit
  std::uint64_t action_visits[2] = {0, 0};
  double q[2] = {0.0, 0.0};  // meaningful once action_visits[a] > 0; see backpropagate
  std::int32_t child[2] = {-1, -1};
  ActionProbs priors;
  bool priors_ready = false;
  BitVector candidate;
  double distance = 0.0;
};

class SearchTree {
public:
  SearchTree(const SearchParams& params, const FrameContext& frame);

  const SearchParams& params() const { return params_; }
  const FrameContext& frame() const { return *frame_; }
  std::size_t size() const { return nodes_.size(); }
  const SearchNode& node(std::size_t i) const { return nodes_[i]; }
  SearchNode& node(std::size_t i) { return nodes_[i]; }
  static constexpr std::size_t root() { return 0; }

  // Creates the child reached by `action`, with N = 1 and zeroed edge stats.
  std::size_t expand(std::size_t parent, Action action);

private:
  SearchParams params_;
  const FrameContext* frame_;
  std::vector<SearchNode> nodes_;
};

double puct_score(const SearchNode& node, Action action, double c_puct);

// argmax of puct_score over legal actions; ties go to extend. nullopt at a
// terminal node (no legal action).
std::optional<Action> select_action(const SearchNode& node, double c_puct);

// +100 when the target stays reachable from new_tep, else minus the
// candidate's Euclidean distance.
double evaluate_reward(const Tep& new_tep, const Tep& target, const BitVector& candidate,
                       std::span<const double> r, const TreeParams& params,
                       ReachRule rule = ReachRule::allow_equal_tail);

struct Trajectory {
  std::vector<std::pair<std::size_t, Action>> steps;  // (node index, action)
};

// For every (s, a) on the path: N(s) += 1, N(s,a) += 1; the edge's first backup
// assigns Q(s,a) = reward, later ones keep Q(s,a) = max(Q, reward). Unvisited
// edges read as 0 in the PUCT score, so a known-bad edge (negative Q) ranks
// below an untried sibling.
void backpropagate(SearchTree& tree, const Trajectory& trajectory, double reward);

enum class EpisodeEnd { target_found, budget_exhausted, dead_end, expansion_limit };
const char* episode_end_name(EpisodeEnd e);

struct EpisodeOutcome {
  EpisodeEnd end = EpisodeEnd::budget_exhausted;
  unsigned steps = 0;
  unsigned expansions = 0;
};

// One descent from the root: at each state check for the target, pick the
// PUCT action, expand unexplored children (reward + backpropagation), and
// keep walking until the target, the step budget, or a terminal node.
// Priors come from `fwd` with `frame_offset` and are cached per node; states
// with one legal action never call the network.
EpisodeOutcome run_episode(SearchTree& tree, PolicyForward& fwd,
                           std::span<const double> frame_offset, const Tep& target,
                           std::ostream* trace = nullptr, unsigned episode_index = 0);

struct VisitRecord {
  std::size_t node = 0;
  double pi[2] = {0.0, 0.0};
};

// Visit-count distributions of every node with at least one action visit.
// Single-legal-action states carry no signal and are skipped by default.
std::vector<VisitRecord> visit_distributions(const SearchTree& tree,
                                             bool include_single_action = false);

}  // namespace tepdec
