#include <benchmark/benchmark.h>

#include <vector>

#include "tepdec/channel.hpp"
#include "tepdec/decoders.hpp"
#include "tepdec/linear_code.hpp"
#include "tepdec/mcts.hpp"
#include "tepdec/policy.hpp"
#include "tepdec/rng.hpp"
#include "tepdec/tep.hpp"

using namespace tepdec;

namespace {

std::vector<ReceivedFrame> make_frames(const LinearCode& code, int count, double snr_db,
                                       std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ReceivedFrame> frames;
  frames.reserve(count);
  for (int i = 0; i < count; ++i) {
    BitVector msg(code.k);
    for (unsigned b = 0; b < code.k; ++b)
      if (rng.uniform() < 0.5) msg.set(b, true);
    frames.push_back(simulate(code, msg, snr_db, rng));
  }
  return frames;
}

}  // namespace

static void BM_EncodeEbch32(benchmark::State& state) {
  LinearCode code = build_ebch32();
  Rng rng(1);
  BitVector msg(code.k);
  for (unsigned b = 0; b < code.k; ++b)
    if (rng.uniform() < 0.5) msg.set(b, true);
  for (auto _ : state) benchmark::DoNotOptimize(encode(code, msg));
}
BENCHMARK(BM_EncodeEbch32);

static void BM_EncodeQr48(benchmark::State& state) {
  LinearCode code = build_qr48();
  Rng rng(1);
  BitVector msg(code.k);
  for (unsigned b = 0; b < code.k; ++b)
    if (rng.uniform() < 0.5) msg.set(b, true);
  for (auto _ : state) benchmark::DoNotOptimize(encode(code, msg));
}
BENCHMARK(BM_EncodeQr48);

static void BM_TreeChildren(benchmark::State& state) {
  TreeParams tp{16, 5};
  auto nodes = enumerate_all(tp);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(children(nodes[i], tp));
    i = (i + 1) % nodes.size();
  }
}
BENCHMARK(BM_TreeChildren);

static void BM_EnumerateTree16_5(benchmark::State& state) {
  TreeParams tp{16, 5};
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_all(tp));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tree_size(tp)));
}
BENCHMARK(BM_EnumerateTree16_5);

static void BM_Reachable(benchmark::State& state) {
  TreeParams tp{16, 5};
  auto nodes = enumerate_all(tp);
  std::size_t i = 1, j = nodes.size() / 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        reachable(nodes[i], nodes[j], tp, ReachRule::allow_equal_tail));
    i = (i + 7) % nodes.size();
    j = (j + 13) % nodes.size();
  }
}
BENCHMARK(BM_Reachable);

// One full policy evaluation built from scratch per node.
static void BM_PolicyForwardDense(benchmark::State& state) {
  LinearCode code = build_ebch32();
  PolicyModel model = init_policy(code.k, code.n, 3, 128, 7);
  auto frames = make_frames(code, 1, 2.0, 11);
  FrameContext ctx = make_frame_context(code, frames[0]);
  TreeParams tp{16, 5};
  Tep tep{{3, 7}};
  BitVector cand = tep_candidate(ctx, tep);
  double d = euclidean_distance(cand, ctx.r);
  ActionMask mask = legal_actions(tep, tp);
  for (auto _ : state) {
    auto feats = featurize(code, tep, cand, d, ctx.llr_norm);
    benchmark::DoNotOptimize(forward(model, feats, mask));
  }
}
BENCHMARK(BM_PolicyForwardDense);

// Shared frame offset plus sparse per-node column updates.
static void BM_PolicyForwardIncremental(benchmark::State& state) {
  LinearCode code = build_ebch32();
  PolicyModel model = init_policy(code.k, code.n, 3, 128, 7);
  auto frames = make_frames(code, 1, 2.0, 11);
  FrameContext ctx = make_frame_context(code, frames[0]);
  TreeParams tp{16, 5};
  PolicyForward fwd(model, code);
  auto offset = fwd.frame_offset(ctx.llr_norm);
  Tep tep{{3, 7}};
  BitVector cand = tep_candidate(ctx, tep);
  double d = euclidean_distance(cand, ctx.r);
  ActionMask mask = legal_actions(tep, tp);
  for (auto _ : state) benchmark::DoNotOptimize(fwd.priors(offset, tep, cand, d, mask));
}
BENCHMARK(BM_PolicyForwardIncremental);

static void BM_MldExhaustive32(benchmark::State& state) {
  LinearCode code = build_ebch32();
  auto frames = make_frames(code, 64, 2.0, 21);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mld_exhaustive(code, frames[i].r));
    i = (i + 1) % frames.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MldExhaustive32);

static void BM_OsdOrder3(benchmark::State& state) {
  LinearCode code = build_ebch32();
  auto frames = make_frames(code, 64, 2.0, 22);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& f = frames[i];
    benchmark::DoNotOptimize(osd_decode(code, f.r, f.llr, 3, StoppingRule::none()));
    i = (i + 1) % frames.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_OsdOrder3);

static void BM_NonGeOsdOrder3(benchmark::State& state) {
  LinearCode code = build_ebch32();
  auto frames = make_frames(code, 64, 2.0, 22);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& f = frames[i];
    benchmark::DoNotOptimize(non_ge_osd_decode(code, f.r, f.llr, 3, StoppingRule::none()));
    i = (i + 1) % frames.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NonGeOsdOrder3);

// Full-budget guided traversal: the complete order-3 tree per frame.
static void BM_PolicyDecodeOrder3(benchmark::State& state) {
  LinearCode code = build_ebch32();
  PolicyModel model = init_policy(code.k, code.n, 3, 128, 7);
  auto frames = make_frames(code, 64, 2.0, 23);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& f = frames[i];
    benchmark::DoNotOptimize(
        mcts_decode(code, f.r, f.llr, 3, model, 0, StoppingRule::none()));
    i = (i + 1) % frames.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PolicyDecodeOrder3);

BENCHMARK_MAIN();
