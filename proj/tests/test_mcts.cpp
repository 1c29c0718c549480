#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "tepdec/channel.hpp"
#include "tepdec/linear_code.hpp"
#include "tepdec/mcts.hpp"
#include "tepdec/policy.hpp"
#include "tepdec/rng.hpp"

using namespace tepdec;

namespace {

LinearCode hamming74() {
  LinearCode code;
  code.n = 7;
  code.k = 4;
  code.name = "Hamming(7,4)";
  code.generator = BinaryMatrix(4, 7);
  const char* rows[4] = {"1000110", "0100101", "0010011", "0001111"};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 7; ++j) code.generator.set(i, j, rows[i][j] == '1');
  return code;
}

struct Setup {
  LinearCode code = hamming74();
  PolicyModel model;
  ReceivedFrame frame;
  FrameContext ctx;
  std::vector<double> offset;
  PolicyForward fwd;

  explicit Setup(std::uint64_t seed, double snr = 2.0)
      : model(init_policy(4, 7, 2, 8, seed)), fwd(model, code) {
    Rng rng(seed);
    BitVector msg(code.k);
    for (std::size_t i = 0; i < code.k; ++i) msg.set(i, rng.next_u64() & 1);
    frame = simulate(code, msg, snr, rng);
    ctx = make_frame_context(code, frame);
    offset = fwd.frame_offset(ctx.llr_norm);
  }
};

void check_conservation(const SearchTree& tree) {
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const SearchNode& node = tree.node(i);
    CHECK(node.visits == 1 + node.action_visits[0] + node.action_visits[1]);
  }
}

}  // namespace

TEST_CASE("frame context pins hard decisions and the base codeword") {
  Setup s(3);
  CHECK(s.ctx.b0 == hard_decision_prefix(s.frame.r, 4));
  CHECK(s.ctx.base_codeword == encode(s.code, s.ctx.b0));
  CHECK(s.ctx.llr_norm.size() == 7);
}

TEST_CASE("tep candidate equals re-encoding the flipped prefix") {
  Setup s(4);
  for (const auto& t : enumerate_all({4, 3})) {
    BitVector flipped = s.ctx.b0;
    for (unsigned idx : t.indices) flipped.flip(idx - 1);
    CHECK(tep_candidate(s.ctx, t) == encode(s.code, flipped));
  }
}

TEST_CASE("puct favors priors at zero visits and value afterwards") {
  SearchNode node;
  node.mask.legal[0] = node.mask.legal[1] = true;
  node.visits = 4;
  node.priors.p[0] = 0.8;
  node.priors.p[1] = 0.2;
  node.q[0] = 0.0;
  node.q[1] = 0.0;
  // c * p * sqrt(N) / (1 + N(s,a))
  CHECK(puct_score(node, Action::extend, 1.38) == doctest::Approx(1.38 * 0.8 * 2.0));
  CHECK(puct_score(node, Action::adjacent, 1.38) == doctest::Approx(1.38 * 0.2 * 2.0));
  CHECK(*select_action(node, 1.38) == Action::extend);
  node.q[1] = 100.0;  // a strong value beats the prior bonus
  CHECK(*select_action(node, 1.38) == Action::adjacent);
  node.action_visits[1] = 3;
  CHECK(puct_score(node, Action::adjacent, 1.38) ==
        doctest::Approx(100.0 + 1.38 * 0.2 * 2.0 / 4.0));
}

TEST_CASE("select action breaks exact ties toward extend") {
  SearchNode node;
  node.mask.legal[0] = node.mask.legal[1] = true;
  node.priors.p[0] = 0.5;
  node.priors.p[1] = 0.5;
  CHECK(*select_action(node, 1.38) == Action::extend);
  SearchNode term;
  CHECK_FALSE(select_action(term, 1.38).has_value());
  SearchNode only1;
  only1.mask.legal[1] = true;
  only1.priors.p[1] = 1.0;
  CHECK(*select_action(only1, 1.38) == Action::adjacent);
}

TEST_CASE("reward is +100 while the target stays reachable, else minus distance") {
  Setup s(5);
  TreeParams p{4, 3};
  Tep target{{2, 3}};
  BitVector cand = tep_candidate(s.ctx, Tep{{4}});
  CHECK(evaluate_reward(Tep{{4}}, target, cand, s.ctx.r, p) == 100.0);
  BitVector cand2 = tep_candidate(s.ctx, Tep{{1}});
  // from {1} the last index can only grow by extension; {2,3} is lost
  CHECK(evaluate_reward(Tep{{1}}, target, cand2, s.ctx.r, p) ==
        -euclidean_distance(cand2, s.ctx.r));
  // arriving exactly at the target is also +100 (reachable via equality)
  BitVector ct = tep_candidate(s.ctx, target);
  CHECK(evaluate_reward(target, target, ct, s.ctx.r, p) == 100.0);
}

TEST_CASE("backpropagate assigns the first reward, then keeps the max") {
  Setup s(6);
  SearchParams params{{4, 2}, 1.38, 0, false, ReachRule::allow_equal_tail};
  SearchTree tree(params, s.ctx);
  const std::size_t c1 = tree.expand(SearchTree::root(), Action::extend);
  Trajectory t;
  t.steps = {{SearchTree::root(), Action::extend}};
  backpropagate(tree, t, -2.5);
  CHECK(tree.node(0).visits == 2);  // 1 from creation + 1 backup
  CHECK(tree.node(0).action_visits[0] == 1);
  // the first backup sets the edge value even when negative, so a wrong
  // subtree is remembered as wrong instead of keeping a neutral 0
  CHECK(tree.node(0).q[0] == -2.5);
  backpropagate(tree, t, 100.0);
  CHECK(tree.node(0).q[0] == 100.0);
  backpropagate(tree, t, -7.0);
  CHECK(tree.node(0).q[0] == 100.0);  // max backup keeps the best seen value
  CHECK(tree.node(0).visits == 4);
  CHECK(tree.node(0).action_visits[0] == 3);
  CHECK(c1 == 1);
  CHECK(tree.node(c1).visits == 1);
}

TEST_CASE("expand validates the action and rejects duplicates") {
  Setup s(7);
  SearchParams params{{4, 2}, 1.38, 0, false, ReachRule::allow_equal_tail};
  SearchTree tree(params, s.ctx);
  CHECK_THROWS_AS(tree.expand(SearchTree::root(), Action::adjacent), std::invalid_argument);
  const std::size_t child = tree.expand(SearchTree::root(), Action::extend);
  CHECK(tree.node(child).tep == Tep{{4}});
  CHECK(tree.node(child).distance ==
        euclidean_distance(tree.node(child).candidate, s.ctx.r));
  CHECK_THROWS_AS(tree.expand(SearchTree::root(), Action::extend), std::invalid_argument);
}

TEST_CASE("episodes find a shallow target and respect conservation") {
  Setup s(8);
  SearchParams params{{4, 3}, 1.38, 0, false, ReachRule::allow_equal_tail};
  SearchTree tree(params, s.ctx);
  Tep target{{3}};
  bool found = false;
  for (unsigned e = 0; e < 50 && !found; ++e) {
    EpisodeOutcome out = run_episode(tree, s.fwd, s.offset, target, nullptr, e);
    check_conservation(tree);
    found = out.end == EpisodeEnd::target_found;
  }
  CHECK(found);
  // the target node must exist in the search tree now
  bool present = false;
  for (std::size_t i = 0; i < tree.size(); ++i) present |= tree.node(i).tep == target;
  CHECK(present);
}

TEST_CASE("deep targets are reached for most prior initializations") {
  // The deepest node of the (4,3) tree sits 9 edges from the root, and the
  // default budget equals that depth, so only a perfect descent reaches it.
  // A dead-end episode updates no statistics, which freezes an unlucky
  // search permanently; a useful engine still has to get there for typical
  // priors, so probe a batch of seeds instead of pinning one.
  Tep target{{1, 2, 3}};
  unsigned found_count = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Setup s(seed);
    SearchParams params{{4, 3}, 1.38, 0, false, ReachRule::allow_equal_tail};
    SearchTree tree(params, s.ctx);
    bool found = false;
    for (unsigned ep = 0; ep < 200 && !found; ++ep)
      found =
          run_episode(tree, s.fwd, s.offset, target, nullptr, ep).end ==
          EpisodeEnd::target_found;
    if (found) ++found_count;
    check_conservation(tree);
    // a frozen search stops growing well short of the 26-node tree
    CHECK(tree.size() <= 26);
  }
  CHECK(found_count >= 4);
}

TEST_CASE("root target is found immediately") {
  Setup s(10);
  SearchParams params{{4, 2}, 1.38, 0, false, ReachRule::allow_equal_tail};
  SearchTree tree(params, s.ctx);
  EpisodeOutcome out = run_episode(tree, s.fwd, s.offset, Tep::root(), nullptr, 0);
  CHECK(out.end == EpisodeEnd::target_found);
  CHECK(out.steps == 0);
  CHECK(out.expansions == 0);
}

TEST_CASE("step budget ends an episode") {
  Setup s(11);
  SearchParams params{{4, 3}, 1.38, 1, false, ReachRule::allow_equal_tail};  // max_steps = 1
  SearchTree tree(params, s.ctx);
  EpisodeOutcome out = run_episode(tree, s.fwd, s.offset, Tep{{1, 2, 3}}, nullptr, 0);
  CHECK(out.end == EpisodeEnd::budget_exhausted);
  CHECK(out.steps <= 1);
  check_conservation(tree);
}

TEST_CASE("classic variant stops after its first expansion") {
  Setup s(12);
  SearchParams params{{4, 3}, 1.38, 0, true, ReachRule::allow_equal_tail};
  SearchTree tree(params, s.ctx);
  EpisodeOutcome out = run_episode(tree, s.fwd, s.offset, Tep{{1, 2, 3}}, nullptr, 0);
  CHECK(out.expansions == 1);
  CHECK(out.end == EpisodeEnd::expansion_limit);
  CHECK(tree.size() == 2);  // root + one child
  check_conservation(tree);
  // default mode expands through fresh children and descends further
  SearchParams multi{{4, 3}, 1.38, 0, false, ReachRule::allow_equal_tail};
  SearchTree tree2(multi, s.ctx);
  EpisodeOutcome out2 = run_episode(tree2, s.fwd, s.offset, Tep{{1, 2, 3}}, nullptr, 0);
  CHECK(out2.expansions > 1);
}

TEST_CASE("trace lines carry episode, step, pattern bits, and reward") {
  Setup s(13);
  SearchParams params{{4, 2}, 1.38, 0, false, ReachRule::allow_equal_tail};
  SearchTree tree(params, s.ctx);
  std::ostringstream trace;
  run_episode(tree, s.fwd, s.offset, Tep{{1, 2}}, &trace, 7);
  std::istringstream in(trace.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    std::istringstream ls(line);
    unsigned episode, step;
    std::string bits;
    double reward;
    REQUIRE(static_cast<bool>(ls >> episode >> step >> bits >> reward));
    CHECK(episode == 7);
    CHECK(bits.size() == 4);
    for (char c : bits) CHECK((c == '0' || c == '1'));
  }
  CHECK(lines > 0);
}

TEST_CASE("a walk into an exhausted branch reports a dead end") {
  Setup s(16);
  SearchParams params{{4, 2}, 1.38, 0, false, ReachRule::allow_equal_tail};
  SearchTree tree(params, s.ctx);
  // pre-expand root -> {4} -> {3} -> {2} -> {2,4} -> {2,3} and poison the
  // path with a huge value so the next walk follows it; {2,3} is terminal
  // and the target {1,4} is unreachable from it
  const std::size_t n4 = tree.expand(SearchTree::root(), Action::extend);
  const std::size_t n3 = tree.expand(n4, Action::adjacent);
  const std::size_t n2 = tree.expand(n3, Action::adjacent);
  const std::size_t n24 = tree.expand(n2, Action::extend);
  const std::size_t n23 = tree.expand(n24, Action::adjacent);
  CHECK(tree.node(n23).mask.count() == 0);
  Trajectory path;
  path.steps = {{SearchTree::root(), Action::extend},
                {n4, Action::adjacent},
                {n3, Action::adjacent},
                {n2, Action::extend},
                {n24, Action::adjacent}};
  backpropagate(tree, path, 1000.0);
  EpisodeOutcome out = run_episode(tree, s.fwd, s.offset, Tep{{1, 4}}, nullptr, 0);
  CHECK(out.end == EpisodeEnd::dead_end);
  CHECK(out.expansions == 0);
  check_conservation(tree);
}

TEST_CASE("visit distributions cover multi-action nodes and sum to one") {
  Setup s(14);
  SearchParams params{{4, 3}, 1.38, 0, false, ReachRule::allow_equal_tail};
  SearchTree tree(params, s.ctx);
  for (unsigned e = 0; e < 30; ++e) run_episode(tree, s.fwd, s.offset, Tep{{1, 2}}, nullptr, e);
  auto records = visit_distributions(tree);
  CHECK(!records.empty());
  for (const auto& rec : records) {
    const SearchNode& node = tree.node(rec.node);
    CHECK(node.mask.count() == 2);
    CHECK(node.action_visits[0] + node.action_visits[1] > 0);
    CHECK(rec.pi[0] + rec.pi[1] == 1.0);
    CHECK(rec.pi[0] >= 0.0);
    CHECK(rec.pi[1] >= 0.0);
    const double total =
        static_cast<double>(node.action_visits[0] + node.action_visits[1]);
    CHECK(rec.pi[0] == doctest::Approx(node.action_visits[0] / total));
  }
  auto with_single = visit_distributions(tree, true);
  CHECK(with_single.size() >= records.size());
}

TEST_CASE("search params sanity") {
  Setup s(15);
  SearchParams params{{4, 5}, 1.38, 0, false, ReachRule::allow_equal_tail};  // m > k
  CHECK_THROWS_AS(SearchTree(params, s.ctx), std::invalid_argument);
}
