#include "tepdec/mcts.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace tepdec {

FrameContext make_frame_context(const LinearCode& code, std::span<const double> r,
                                std::span<const double> llr) {
  if (r.size() != code.n || llr.size() != code.n)
    throw std::invalid_argument("r / llr length != n");
  FrameContext ctx;
  ctx.code = &code;
  ctx.r.assign(r.begin(), r.end());
  ctx.llr.assign(llr.begin(), llr.end());
  ctx.llr_norm = normalize_llr(llr);
  ctx.b0 = hard_decision_prefix(r, code.k);
  ctx.base_codeword = encode(code, ctx.b0);
  return ctx;
}

FrameContext make_frame_context(const LinearCode& code, const ReceivedFrame& frame) {
  return make_frame_context(code, frame.r, frame.llr);
}

BitVector tep_candidate(const FrameContext& ctx, const Tep& tep) {
  BitVector c = ctx.base_codeword;
  for (unsigned idx : tep.indices) c.xor_words(ctx.code->generator.row_words(idx - 1));
  return c;
}

SearchTree::SearchTree(const SearchParams& params, const FrameContext& frame)
    : params_(params), frame_(&frame) {
  if (params_.max_steps == 0) params_.max_steps = max_depth(params_.tree);
  SearchNode root;
  root.tep = Tep::root();
  root.mask = legal_actions(root.tep, params_.tree);
  root.candidate = frame_->base_codeword;
  root.distance = euclidean_distance(root.candidate, frame_->r);
  nodes_.push_back(std::move(root));
}

std::size_t SearchTree::expand(std::size_t parent, Action action) {
  SearchNode& p = nodes_[parent];
  const auto a = static_cast<unsigned>(action);
  if (!p.mask.legal[a]) throw std::invalid_argument("expanding an illegal action");
  if (p.child[a] != -1) throw std::invalid_argument("child already exists");
  auto kids = children(p.tep, params_.tree);
  const Tep& tep = action == Action::extend ? *kids.extended : *kids.adjacent;
  SearchNode node;
  node.tep = tep;
  node.mask = legal_actions(tep, params_.tree);
  node.candidate = tep_candidate(*frame_, tep);
  node.distance = euclidean_distance(node.candidate, frame_->r);
  const auto idx = nodes_.size();
  nodes_.push_back(std::move(node));
  nodes_[parent].child[a] = static_cast<std::int32_t>(idx);
  return idx;
}

double puct_score(const SearchNode& node, Action action, double c_puct) {
  const auto a = static_cast<unsigned>(action);
  if (!node.mask.legal[a]) throw std::invalid_argument("illegal action");
  const double explore = c_puct * node.priors.p[a] *
                         std::sqrt(static_cast<double>(node.visits)) /
                         (1.0 + static_cast<double>(node.action_visits[a]));
  return node.q[a] + explore;
}

std::optional<Action> select_action(const SearchNode& node, double c_puct) {
  const bool e = node.mask.legal[0], adj = node.mask.legal[1];
  if (!e && !adj) return std::nullopt;
  if (e && !adj) return Action::extend;
  if (!e && adj) return Action::adjacent;
  // tie goes to extend
  return puct_score(node, Action::extend, c_puct) >= puct_score(node, Action::adjacent, c_puct)
             ? Action::extend
             : Action::adjacent;
}

double evaluate_reward(const Tep& new_tep, const Tep& target, const BitVector& candidate,
                       std::span<const double> r, const TreeParams& params, ReachRule rule) {
  if (reachable(new_tep, target, params, rule)) return 100.0;
  return -euclidean_distance(candidate, r);
}

void backpropagate(SearchTree& tree, const Trajectory& trajectory, double reward) {
  for (const auto& [idx, action] : trajectory.steps) {
    SearchNode& node = tree.node(idx);
    const auto a = static_cast<unsigned>(action);
    node.visits += 1;
    // The first backup assigns the reward outright; later backups keep the max.
    // A zero floor would swallow every negative reward, making the graded
    // distance penalty inert: a wrong subtree would keep its neutral value and
    // a confident misprediction could only be overridden by the visit-count
    // denominator, which poisons the visit distributions the trainer consumes.
    const bool first = node.action_visits[a] == 0;
    node.action_visits[a] += 1;
    if (first || reward > node.q[a]) node.q[a] = reward;
  }
}

EpisodeOutcome run_episode(SearchTree& tree, PolicyForward& fwd,
                           std::span<const double> frame_offset, const Tep& target,
                           std::ostream* trace, unsigned episode_index) {
  const SearchParams& params = tree.params();
  Trajectory trajectory;
  EpisodeOutcome out;
  std::size_t cur = SearchTree::root();
  for (;;) {
    if (tree.node(cur).tep == target) {
      out.end = EpisodeEnd::target_found;
      return out;
    }
    if (out.steps == params.max_steps) {
      out.end = EpisodeEnd::budget_exhausted;
      return out;
    }
    if (tree.node(cur).mask.count() == 0) {
      out.end = EpisodeEnd::dead_end;
      return out;
    }
    {
      SearchNode& node = tree.node(cur);
      if (!node.priors_ready) {
        node.priors =
            fwd.priors(frame_offset, node.tep, node.candidate, node.distance, node.mask);
        node.priors_ready = true;
      }
    }
    const Action action = *select_action(tree.node(cur), params.c_puct);
    out.steps += 1;
    trajectory.steps.emplace_back(cur, action);
    const auto a = static_cast<unsigned>(action);
    std::int32_t next = tree.node(cur).child[a];
    if (next == -1) {
      const std::size_t child = tree.expand(cur, action);
      const SearchNode& cn = tree.node(child);
      const double reward = evaluate_reward(cn.tep, target, cn.candidate, tree.frame().r,
                                            params.tree, params.reach_rule);
      backpropagate(tree, trajectory, reward);
      out.expansions += 1;
      if (trace)
        *trace << episode_index << ' ' << out.steps << ' '
               << cn.tep.to_bits(params.tree.k).to_string() << ' ' << reward << '\n';
      if (params.classic_mcts) {
        if (cn.tep == target) {
          out.end = EpisodeEnd::target_found;
        } else {
          out.end = EpisodeEnd::expansion_limit;
        }
        return out;
      }
      next = static_cast<std::int32_t>(child);
    }
    cur = static_cast<std::size_t>(next);
  }
}

const char* episode_end_name(EpisodeEnd e) {
  switch (e) {
    case EpisodeEnd::target_found: return "target-found";
    case EpisodeEnd::budget_exhausted: return "budget-exhausted";
    case EpisodeEnd::dead_end: return "dead-end";
    case EpisodeEnd::expansion_limit: return "expansion-limit";
  }
  return "?";
}

std::vector<VisitRecord> visit_distributions(const SearchTree& tree, bool include_single_action) {
  std::vector<VisitRecord> out;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const SearchNode& node = tree.node(i);
    const std::uint64_t total = node.action_visits[0] + node.action_visits[1];
    if (total == 0) continue;
    if (node.mask.count() < 2 && !include_single_action) continue;
    VisitRecord rec;
    rec.node = i;
    const double pi0 =
        static_cast<double>(node.action_visits[0]) / static_cast<double>(total);
    rec.pi[0] = pi0;
    rec.pi[1] = 1.0 - pi0;  // exact complement of a ratio; sums to 1
    out.push_back(rec);
  }
  return out;
}

}  // namespace tepdec
