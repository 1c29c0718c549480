#include "tepdec/decoders.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tepdec/channel.hpp"

namespace tepdec {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// first differing position decides, bit 0 first
bool bit_lex_less(const BitVector& a, const BitVector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool av = a.get(i), bv = b.get(i);
    if (av != bv) return bv;
  }
  return false;
}

// ascending-weight enumeration state: 1-based positions, lexicographic
// within a weight class
bool next_combination(std::vector<unsigned>& c, unsigned k) {
  const std::size_t w = c.size();
  for (std::size_t i = w; i-- > 0;) {
    if (c[i] < k - (w - 1 - i)) {
      ++c[i];
      for (std::size_t j = i + 1; j < w; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

double flip_penalty(const BitVector& candidate, const BitVector& hd,
                    std::span<const double> llr) {
  double s = 0.0;
  for (std::size_t i = 0; i < candidate.size(); ++i)
    if (candidate.get(i) != hd.get(i)) s += std::abs(llr[i]);
  return s;
}

struct Incumbent {
  BitVector codeword;  // original coordinates
  double distance = 0.0;
  bool set = false;

  // strictly smaller distance wins; exact ties keep the lexicographically
  // smaller codeword so every complete search returns the same answer
  bool offer(const BitVector& cw, double d) {
    if (set && (d > distance || (d == distance && !bit_lex_less(cw, codeword)))) return false;
    codeword = cw;
    distance = d;
    set = true;
    return true;
  }
};

// Shared enumeration loop for both OSD variants. Everything runs in the
// sorted domain; `total` maps sorted positions back to original ones (empty
// means identity). The oracle comparison happens in the sorted domain too.
DecodeOutcome osd_enumerate(const BinaryMatrix& gen, std::span<const double> rp,
                            std::span<const double> llrp, unsigned m,
                            const StoppingRule& stop,
                            std::span<const std::size_t> total) {
  const std::size_t k = gen.rows(), n = gen.cols();
  const BitVector b0 = hard_decision_prefix(rp, k);
  const BitVector base = gf2_vecmat(b0, gen);
  const BitVector hd = stop.kind == StopKind::probability ? hard_decision(rp) : BitVector();
  BitVector oracle_p;
  if (stop.kind == StopKind::perfect) {
    if (stop.oracle.size() != n) throw std::invalid_argument("oracle length != n");
    oracle_p = total.empty() ? stop.oracle : permute_bits(stop.oracle, total);
  }
  auto unpermute = [&](const BitVector& v) {
    return total.empty() ? v : unpermute_bits(v, total);
  };

  DecodeOutcome out;
  Incumbent best;
  BitVector cand(n);
  for (unsigned w = 0; w <= m; ++w) {
    std::vector<unsigned> combo(w);
    std::iota(combo.begin(), combo.end(), 1u);
    do {
      cand = base;
      for (unsigned idx : combo) cand.xor_words(gen.row_words(idx - 1));
      const double d = euclidean_distance(cand, rp);
      out.teps_visited += 1;
      best.offer(unpermute(cand), d);
      bool fire = false;
      if (stop.kind == StopKind::perfect)
        fire = cand == oracle_p;
      else if (stop.kind == StopKind::probability)
        fire = std::exp(-flip_penalty(cand, hd, llrp)) >= stop.tau;
      if (fire) {
        out.codeword = best.codeword;
        out.reason = StopReason::stopping_rule;
        return out;
      }
    } while (w > 0 && next_combination(combo, static_cast<unsigned>(k)));
  }
  out.codeword = best.codeword;
  out.reason = StopReason::tree_exhausted;
  return out;
}

void check_decode_args(const LinearCode& code, std::span<const double> r,
                       std::span<const double> llr, unsigned m) {
  validate(code);
  if (r.size() != code.n || llr.size() != code.n)
    throw std::invalid_argument("r / llr length != n");
  if (m > code.k) throw std::invalid_argument("m > k");
}

}  // namespace

StoppingRule StoppingRule::perfect(BitVector oracle_codeword) {
  StoppingRule rule;
  rule.kind = StopKind::perfect;
  rule.oracle = std::move(oracle_codeword);
  return rule;
}

StoppingRule StoppingRule::probability(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in [0, 1]");
  StoppingRule rule;
  rule.kind = StopKind::probability;
  rule.tau = tau;
  return rule;
}

bool stopping_check(const StoppingRule& rule, const BitVector& candidate,
                    std::span<const double> r, std::span<const double> llr) {
  switch (rule.kind) {
    case StopKind::none:
      return false;
    case StopKind::perfect:
      if (rule.oracle.size() != candidate.size())
        throw std::invalid_argument("oracle length mismatch");
      return candidate == rule.oracle;
    case StopKind::probability: {
      if (r.size() != candidate.size() || llr.size() != candidate.size())
        throw std::invalid_argument("length mismatch");
      const BitVector hd = hard_decision(r);
      return std::exp(-flip_penalty(candidate, hd, llr)) >= rule.tau;
    }
  }
  return false;
}

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::stopping_rule: return "stopping-rule";
    case StopReason::budget: return "budget";
    case StopReason::tree_exhausted: return "tree-exhausted";
  }
  return "?";
}

DecodeOutcome osd_decode(const LinearCode& code, std::span<const double> r,
                         std::span<const double> llr, unsigned m, const StoppingRule& stop) {
  const auto t0 = Clock::now();
  check_decode_args(code, r, llr, m);
  const std::size_t n = code.n;

  // stable sort by descending reliability
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(llr[a]) > std::abs(llr[b]);
  });

  BinaryMatrix gp(code.k, n);
  for (std::size_t i = 0; i < code.k; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (code.generator.get(i, order[j])) gp.set(i, j, true);
  auto sys = gf2_systematize(gp);

  std::vector<std::size_t> total(n);
  for (std::size_t j = 0; j < n; ++j) total[j] = order[sys.perm[j]];
  std::vector<double> rp(n), llrp(n);
  for (std::size_t j = 0; j < n; ++j) {
    rp[j] = r[total[j]];
    llrp[j] = llr[total[j]];
  }

  DecodeOutcome out = osd_enumerate(sys.matrix, rp, llrp, m, stop, total);
  out.distance = euclidean_distance(out.codeword, r);
  out.wall_time_s = seconds_since(t0);
  return out;
}

DecodeOutcome non_ge_osd_decode(const LinearCode& code, std::span<const double> r,
                                std::span<const double> llr, unsigned m,
                                const StoppingRule& stop) {
  const auto t0 = Clock::now();
  check_decode_args(code, r, llr, m);
  DecodeOutcome out = osd_enumerate(code.generator, r, llr, m, stop, {});
  out.distance = euclidean_distance(out.codeword, r);
  out.wall_time_s = seconds_since(t0);
  return out;
}

BitVector mld_exhaustive(const LinearCode& code, std::span<const double> r) {
  validate(code);
  if (r.size() != code.n) throw std::invalid_argument("r length != n");
  if (code.k > 24) throw std::invalid_argument("k > 24 is infeasible for exhaustive decoding");
  if (code.n > 64) throw std::invalid_argument("n > 64 not supported");

  std::vector<std::uint64_t> rows(code.k);
  for (std::size_t i = 0; i < code.k; ++i) rows[i] = code.generator.row_words(i)[0];

  auto dist_of = [&](std::uint64_t word) {
    double d = 0.0;
    for (std::size_t i = 0; i < code.n; ++i) {
      const double diff = r[i] - (((word >> i) & 1) ? -1.0 : 1.0);
      d += diff * diff;
    }
    return d;
  };
  // message bit 0 is the most significant position for lexicographic order
  auto msg_lex_less = [&](std::uint64_t a, std::uint64_t b) {
    for (std::size_t i = 0; i < code.k; ++i) {
      const bool av = (a >> i) & 1, bv = (b >> i) & 1;
      if (av != bv) return bv;
    }
    return false;
  };

  std::uint64_t cur = 0, best_word = 0, best_msg = 0;
  double best_d = dist_of(0);
  const std::uint64_t count = std::uint64_t{1} << code.k;
  for (std::uint64_t i = 1; i < count; ++i) {
    cur ^= rows[std::countr_zero(i)];
    const std::uint64_t msg = i ^ (i >> 1);  // Gray position
    const double d = dist_of(cur);
    if (d < best_d || (d == best_d && msg_lex_less(msg, best_msg))) {
      best_d = d;
      best_word = cur;
      best_msg = msg;
    }
  }
  BitVector out(code.n);
  for (std::size_t i = 0; i < code.n; ++i) out.set(i, (best_word >> i) & 1);
  return out;
}

DecodeOutcome mld_decode(const LinearCode& code, std::span<const double> r) {
  const auto t0 = Clock::now();
  DecodeOutcome out;
  out.codeword = mld_exhaustive(code, r);
  out.distance = euclidean_distance(out.codeword, r);
  out.teps_visited = std::uint64_t{1} << code.k;
  out.reason = StopReason::tree_exhausted;
  out.wall_time_s = seconds_since(t0);
  return out;
}

PolicyDecoder::PolicyDecoder(const LinearCode& code, unsigned m, const PolicyModel& model,
                             const FeatureOptions& opts)
    : code_(&code),
      params_{static_cast<unsigned>(code.k), m},
      tree_(params_),
      fwd_(model, code, opts) {
  if (m > code.k) throw std::invalid_argument("m > k");
}

DecodeOutcome PolicyDecoder::decode(std::span<const double> r, std::span<const double> llr,
                                    std::uint64_t budget, const StoppingRule& stop) {
  const auto t0 = Clock::now();
  check_decode_args(*code_, r, llr, params_.m);
  if (budget == 0) budget = tree_.size();
  if (stop.kind == StopKind::perfect && stop.oracle.size() != code_->n)
    throw std::invalid_argument("oracle length != n");

  const std::vector<double> llr_norm = normalize_llr(llr);
  const std::vector<double> offset = fwd_.frame_offset(llr_norm);
  const BitVector b0 = hard_decision_prefix(r, code_->k);
  const BitVector base = gf2_vecmat(b0, code_->generator);
  const BitVector hd = stop.kind == StopKind::probability ? hard_decision(r) : BitVector();

  struct Frame {
    std::size_t node;
    BitVector candidate;
    std::size_t kids[2];
    unsigned kid_count;
    unsigned next_kid;
  };
  std::vector<Frame> stack;
  stack.reserve(max_depth(params_) + 1);

  DecodeOutcome out;
  Incumbent best;

  // child candidates differ from the parent by one or two generator rows
  auto child_candidate = [&](const Frame& f, std::size_t child_idx) {
    const TepTree::Node& parent = tree_.node(f.node);
    BitVector cand = f.candidate;
    if (child_idx == static_cast<std::size_t>(parent.child[0])) {
      cand.xor_words(code_->generator.row_words(params_.k - 1));
    } else {
      const unsigned last = parent.tep.last();
      cand.xor_words(code_->generator.row_words(last - 1));
      cand.xor_words(code_->generator.row_words(last - 2));
    }
    return cand;
  };

  // evaluate one node, queue its children ordered by prior; true = stop now
  auto push_node = [&](std::size_t idx, BitVector cand) -> bool {
    if (out.teps_visited == budget) {
      out.reason = StopReason::budget;
      return true;
    }
    Frame f{idx, std::move(cand), {0, 0}, 0, 0};
    const double d = euclidean_distance(f.candidate, r);
    out.teps_visited += 1;
    best.offer(f.candidate, d);
    bool fire = false;
    if (stop.kind == StopKind::perfect)
      fire = f.candidate == stop.oracle;
    else if (stop.kind == StopKind::probability)
      fire = std::exp(-flip_penalty(f.candidate, hd, llr)) >= stop.tau;
    if (fire) {
      out.reason = StopReason::stopping_rule;
      return true;
    }
    const TepTree::Node& node = tree_.node(idx);
    const bool has_e = node.child[0] != TepTree::npos;
    const bool has_a = node.child[1] != TepTree::npos;
    if (has_e && has_a) {
      ActionMask mask;
      mask.legal[0] = mask.legal[1] = true;
      const ActionProbs pr = fwd_.priors(offset, node.tep, f.candidate, d, mask);
      // descending prior, extend first on a tie
      if (pr.p[0] >= pr.p[1]) {
        f.kids[0] = static_cast<std::size_t>(node.child[0]);
        f.kids[1] = static_cast<std::size_t>(node.child[1]);
      } else {
        f.kids[0] = static_cast<std::size_t>(node.child[1]);
        f.kids[1] = static_cast<std::size_t>(node.child[0]);
      }
      f.kid_count = 2;
    } else if (has_e || has_a) {
      f.kids[0] = static_cast<std::size_t>(has_e ? node.child[0] : node.child[1]);
      f.kid_count = 1;
    }
    stack.push_back(std::move(f));
    return false;
  };

  bool stopped = push_node(TepTree::root(), base);
  while (!stopped && !stack.empty()) {
    Frame& top = stack.back();
    if (top.next_kid == top.kid_count) {
      stack.pop_back();
      continue;
    }
    const std::size_t child = top.kids[top.next_kid++];
    BitVector cand = child_candidate(top, child);
    stopped = push_node(child, std::move(cand));
  }
  if (!stopped) out.reason = StopReason::tree_exhausted;

  out.codeword = best.codeword;
  out.distance = best.distance;
  out.wall_time_s = seconds_since(t0);
  return out;
}

DecodeOutcome mcts_decode(const LinearCode& code, std::span<const double> r,
                          std::span<const double> llr, unsigned m, const PolicyModel& model,
                          std::uint64_t budget, const StoppingRule& stop) {
  PolicyDecoder dec(code, m, model, {});
  return dec.decode(r, llr, budget, stop);
}

}  // namespace tepdec
