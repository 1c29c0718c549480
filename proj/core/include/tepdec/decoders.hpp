#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "tepdec/bits.hpp"
#include "tepdec/linear_code.hpp"
#include "tepdec/policy.hpp"
#include "tepdec/tep.hpp"

namespace tepdec {

enum class StopKind { none, perfect, probability };

struct StoppingRule {
  StopKind kind = StopKind::none;
  BitVector oracle;  // perfect: terminate on exactly this codeword
  double tau = 0.9;  // probability: fire at P_s >= tau

  static StoppingRule none() { return {}; }
  static StoppingRule perfect(BitVector oracle_codeword);
  static StoppingRule probability(double tau = 0.9);  // requires tau in [0, 1]
};

// none: never fires. perfect: candidate equals the oracle. probability:
// P_s = prod over flipped positions of q_i/(1-q_i) with q_i = 1/(1+e^{|l_i|})
// and flips measured against hard_decision(r); equivalently
// exp(-sum of |llr_i| over flips), 1 at zero flips; fires at P_s >= tau.
bool stopping_check(const StoppingRule& rule, const BitVector& candidate,
                    std::span<const double> r, std::span<const double> llr);

enum class StopReason { stopping_rule, budget, tree_exhausted };
const char* stop_reason_name(StopReason r);

struct DecodeOutcome {
  BitVector codeword;
  double distance = 0.0;  // euclidean_distance(codeword, r)
  std::uint64_t teps_visited = 0;
  StopReason reason = StopReason::tree_exhausted;
  double wall_time_s = 0.0;
};

// Reliability-ordered OSD: sort positions by descending |llr| (stable),
// re-systematize the permuted generator, flip patterns of weight <= m on the
// most reliable basis in ascending weight (lexicographic within a weight).
DecodeOutcome osd_decode(const LinearCode& code, std::span<const double> r,
                         std::span<const double> llr, unsigned m, const StoppingRule& stop);

// Same enumeration applied directly to the first k hard decisions, skipping
// the permutation and the Gaussian elimination.
DecodeOutcome non_ge_osd_decode(const LinearCode& code, std::span<const double> r,
                                std::span<const double> llr, unsigned m,
                                const StoppingRule& stop);

// Minimum-distance codeword over all 2^k messages; distance ties keep the
// lexicographically smallest message. k <= 24.
BitVector mld_exhaustive(const LinearCode& code, std::span<const double> r);
DecodeOutcome mld_decode(const LinearCode& code, std::span<const double> r);

// Depth-first traversal of the pre-generated pattern tree, descending into
// the highest-prior unexplored child and backtracking through an explicit
// stack. Holds the tree and the forward cache, so reuse one instance across
// frames (single-threaded; one instance per worker).
class PolicyDecoder {
public:
  PolicyDecoder(const LinearCode& code, unsigned m, const PolicyModel& model,
                const FeatureOptions& opts = {});

  // budget = max TEPs visited; 0 means the full tree.
  DecodeOutcome decode(std::span<const double> r, std::span<const double> llr,
                       std::uint64_t budget, const StoppingRule& stop);

  const TepTree& tree() const { return tree_; }

private:
  const LinearCode* code_;
  TreeParams params_;
  TepTree tree_;
  PolicyForward fwd_;
};

// One-shot convenience wrapper; building the tree and the forward cache per
// call is wasteful in loops, use PolicyDecoder there.
DecodeOutcome mcts_decode(const LinearCode& code, std::span<const double> r,
                          std::span<const double> llr, unsigned m, const PolicyModel& model,
                          std::uint64_t budget, const StoppingRule& stop);

}  // namespace tepdec
