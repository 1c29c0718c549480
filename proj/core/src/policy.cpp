#include "tepdec/policy.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "tepdec/rng.hpp"

namespace tepdec {

namespace {

// Four independent accumulators keep the order fixed (reproducible) while
// still vectorizing without -ffast-math.
double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = (s0 + s2) + (s1 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double* y, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

ActionProbs masked_softmax(const double* logits, const ActionMask& mask) {
  ActionProbs pr;
  if (mask.legal[0] && mask.legal[1]) {
    const double p0 = 1.0 / (1.0 + std::exp(logits[1] - logits[0]));
    pr.p[0] = p0;
    pr.p[1] = 1.0 - p0;  // exact complement, sums to 1 by construction
  } else if (mask.legal[0]) {
    pr.p[0] = 1.0;
  } else if (mask.legal[1]) {
    pr.p[1] = 1.0;
  } else {
    throw std::invalid_argument("no legal action");
  }
  return pr;
}

struct LayerDim {
  std::size_t in, out;
};

std::vector<LayerDim> layer_dims(const PolicyModel& m) {
  std::vector<LayerDim> dims;
  dims.push_back({m.input_dim, m.hidden_units});
  for (unsigned l = 1; l < m.hidden_layers; ++l) dims.push_back({m.hidden_units, m.hidden_units});
  dims.push_back({m.hidden_units, 2});
  return dims;
}

PolicyModel init_common(unsigned k, unsigned n, unsigned input_dim, unsigned hidden_layers,
                        unsigned hidden_units, std::uint64_t seed) {
  if (hidden_layers < 1 || hidden_units < 1 || input_dim < 1)
    throw std::invalid_argument("need hidden_layers >= 1, hidden_units >= 1, input_dim >= 1");
  PolicyModel m;
  m.k = k;
  m.n = n;
  m.input_dim = input_dim;
  m.hidden_layers = hidden_layers;
  m.hidden_units = hidden_units;
  Rng rng(seed);
  for (auto [in, out] : layer_dims(m)) {
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    std::vector<double> w(in * out);
    for (auto& v : w) v = (2.0 * rng.uniform() - 1.0) * a;
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(out, 0.0);
  }
  return m;
}

}  // namespace

ActionMask legal_actions(const Tep& t, const TreeParams& p) {
  ActionMask mask;
  mask.legal[static_cast<unsigned>(Action::extend)] =
      (t.is_root() || t.last() != p.k) && t.weight() < p.m;
  if (!t.is_root() && t.last() > 1) {
    const std::size_t w = t.weight();
    mask.legal[static_cast<unsigned>(Action::adjacent)] =
        w == 1 || t.last() - 1 > t.indices[w - 2];
  }
  return mask;
}

std::size_t PolicyModel::parameter_count() const {
  std::size_t c = 0;
  for (const auto& w : weights) c += w.size();
  for (const auto& b : biases) c += b.size();
  return c;
}

std::uint64_t PolicyModel::forward_macs() const {
  const std::uint64_t u = hidden_units;
  return std::uint64_t{input_dim} * u + std::uint64_t{hidden_layers - 1} * u * u + u * 2;
}

unsigned policy_input_dim(unsigned k, unsigned n) { return k + k * n + 2 * n + 1; }

PolicyModel init_policy(unsigned k, unsigned n, unsigned hidden_layers, unsigned hidden_units,
                        std::uint64_t seed) {
  if (k < 1 || n <= k) throw std::invalid_argument("need 1 <= k < n");
  return init_common(k, n, policy_input_dim(k, n), hidden_layers, hidden_units, seed);
}

PolicyModel init_policy_raw(unsigned input_dim, unsigned hidden_layers, unsigned hidden_units,
                            std::uint64_t seed) {
  return init_common(0, 0, input_dim, hidden_layers, hidden_units, seed);
}

void validate(const PolicyModel& m) {
  if (m.hidden_layers < 1 || m.hidden_units < 1 || m.input_dim < 1)
    throw std::invalid_argument("degenerate model dimensions");
  const auto dims = layer_dims(m);
  if (m.weights.size() != dims.size() || m.biases.size() != dims.size())
    throw std::invalid_argument("layer count mismatch");
  for (std::size_t l = 0; l < dims.size(); ++l) {
    if (m.weights[l].size() != dims[l].in * dims[l].out || m.biases[l].size() != dims[l].out)
      throw std::invalid_argument("layer shape mismatch");
    for (double v : m.weights[l])
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite weight");
    for (double v : m.biases[l])
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite bias");
  }
}

std::vector<double> featurize(const LinearCode& code, const Tep& tep, const BitVector& candidate,
                              double distance, std::span<const double> llr_norm,
                              const FeatureOptions& opts) {
  const std::size_t k = code.k, n = code.n;
  if (candidate.size() != n || llr_norm.size() != n)
    throw std::invalid_argument("candidate / llr length != n");
  std::vector<double> f(policy_input_dim(static_cast<unsigned>(k), static_cast<unsigned>(n)), 0.0);
  for (unsigned idx : tep.indices) {
    if (idx < 1 || idx > k) throw std::invalid_argument("tep index out of range");
    f[idx - 1] = 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) f[k + i] = candidate.get(i) ? 1.0 : 0.0;
  f[k + n] = distance;
  if (opts.include_generator)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < n; ++j)
        f[k + n + 1 + i * n + j] = code.generator.get(i, j) ? 1.0 : 0.0;
  for (std::size_t i = 0; i < n; ++i) f[k + n + 1 + k * n + i] = llr_norm[i];
  return f;
}

ActionProbs forward(const PolicyModel& m, std::span<const double> features,
                    const ActionMask& mask) {
  if (features.size() != m.input_dim) throw std::invalid_argument("feature length != input_dim");
  if (mask.count() == 0) throw std::invalid_argument("no legal action");
  const auto dims = layer_dims(m);
  std::vector<double> cur(features.begin(), features.end()), next;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    next.assign(dims[l].out, 0.0);
    for (std::size_t o = 0; o < dims[l].out; ++o)
      next[o] = m.biases[l][o] + dot(m.weights[l].data() + o * dims[l].in, cur.data(), dims[l].in);
    if (l + 1 < dims.size())
      for (auto& v : next) v = v > 0.0 ? v : 0.0;
    cur.swap(next);
  }
  return masked_softmax(cur.data(), mask);
}

Gradients zero_gradients(const PolicyModel& m) {
  Gradients g;
  for (const auto& w : m.weights) g.weights.emplace_back(w.size(), 0.0);
  for (const auto& b : m.biases) g.biases.emplace_back(b.size(), 0.0);
  return g;
}

double loss_and_grad(const PolicyModel& m, std::span<const TrainBatchEntry> batch,
                     Gradients& out) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const auto dims = layer_dims(m);
  const std::size_t layers = dims.size();
  out = zero_gradients(m);

  // activations[l] feeds layer l; preacts[l] is layer l's output before ReLU
  std::vector<std::vector<double>> acts(layers + 1), deltas(layers + 1);
  std::vector<std::size_t> nz;
  double loss = 0.0;

  for (const auto& entry : batch) {
    if (entry.features.size() != m.input_dim)
      throw std::invalid_argument("feature length != input_dim");
    const double* x = entry.features.data();
    nz.clear();
    for (std::size_t j = 0; j < m.input_dim; ++j)
      if (x[j] != 0.0) nz.push_back(j);

    // forward
    acts[0].assign(x, x + m.input_dim);
    for (std::size_t l = 0; l < layers; ++l) {
      acts[l + 1].assign(dims[l].out, 0.0);
      for (std::size_t o = 0; o < dims[l].out; ++o) {
        const double* w = m.weights[l].data() + o * dims[l].in;
        double acc = m.biases[l][o];
        if (l == 0)
          for (std::size_t j : nz) acc += w[j] * x[j];
        else
          acc += dot(w, acts[l].data(), dims[l].in);
        acts[l + 1][o] = l + 1 < layers ? (acc > 0.0 ? acc : 0.0) : acc;
      }
    }

    const ActionProbs pr = masked_softmax(acts[layers].data(), entry.mask);
    deltas[layers].assign(2, 0.0);
    const bool two_legal = entry.mask.legal[0] && entry.mask.legal[1];
    for (unsigned a = 0; a < 2; ++a) {
      if (!entry.mask.legal[a]) continue;
      if (entry.target[a] > 0.0)
        loss -= entry.target[a] * std::log(std::max(pr.p[a], 1e-12));
      // single-legal probability is pinned at 1; no gradient flows
      if (two_legal) deltas[layers][a] = pr.p[a] - entry.target[a];
    }

    // backward
    for (std::size_t l = layers; l-- > 0;) {
      const auto& d = deltas[l + 1];
      double* gw = out.weights[l].data();
      for (std::size_t o = 0; o < dims[l].out; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        out.biases[l][o] += dv;
        double* gr = gw + o * dims[l].in;
        if (l == 0)
          for (std::size_t j : nz) gr[j] += dv * x[j];
        else
          axpy(gr, dv, acts[l].data(), dims[l].in);
      }
      if (l == 0) break;
      deltas[l].assign(dims[l].in, 0.0);
      for (std::size_t o = 0; o < dims[l].out; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        axpy(deltas[l].data(), dv, m.weights[l].data() + o * dims[l].in, dims[l].in);
      }
      for (std::size_t i = 0; i < dims[l].in; ++i)
        if (acts[l][i] <= 0.0) deltas[l][i] = 0.0;  // ReLU gate
    }
  }

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (auto& w : out.weights)
    for (auto& v : w) v *= inv_b;
  for (auto& b : out.biases)
    for (auto& v : b) v *= inv_b;
  return loss * inv_b;
}

AdamState make_adam(const PolicyModel& m, double lr) {
  AdamState s;
  s.lr = lr;
  for (const auto& w : m.weights) {
    s.m_w.emplace_back(w.size(), 0.0);
    s.v_w.emplace_back(w.size(), 0.0);
  }
  for (const auto& b : m.biases) {
    s.m_b.emplace_back(b.size(), 0.0);
    s.v_b.emplace_back(b.size(), 0.0);
  }
  return s;
}

void adam_step(PolicyModel& model, AdamState& s, const Gradients& grads) {
  if (grads.weights.size() != model.weights.size() || grads.biases.size() != model.biases.size())
    throw std::invalid_argument("gradient shape mismatch");
  for (const auto& w : grads.weights)
    for (double v : w)
      if (!std::isfinite(v)) throw std::runtime_error("training diverged: non-finite gradient");
  for (const auto& b : grads.biases)
    for (double v : b)
      if (!std::isfinite(v)) throw std::runtime_error("training diverged: non-finite gradient");

  s.step += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  auto update = [&](std::vector<double>& theta, std::vector<double>& mm, std::vector<double>& vv,
                    const std::vector<double>& g) {
    if (g.size() != theta.size()) throw std::invalid_argument("gradient shape mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      mm[i] = s.beta1 * mm[i] + (1.0 - s.beta1) * g[i];
      vv[i] = s.beta2 * vv[i] + (1.0 - s.beta2) * g[i] * g[i];
      theta[i] -= s.lr * (mm[i] / bc1) / (std::sqrt(vv[i] / bc2) + s.eps);
    }
  };
  for (std::size_t l = 0; l < model.weights.size(); ++l)
    update(model.weights[l], s.m_w[l], s.v_w[l], grads.weights[l]);
  for (std::size_t l = 0; l < model.biases.size(); ++l)
    update(model.biases[l], s.m_b[l], s.v_b[l], grads.biases[l]);
}

namespace {
constexpr char kMagic[8] = {'T', 'E', 'P', 'D', 'P', 'O', 'L', '1'};
static_assert(std::endian::native == std::endian::little);

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("truncated checkpoint");
  return v;
}
}  // namespace

void save_checkpoint(const PolicyModel& model, const std::string& path) {
  validate(model);
  if (model.k == 0 || model.n == 0 ||
      model.input_dim != policy_input_dim(model.k, model.n))
    throw std::invalid_argument("only (k,n)-derived models can be checkpointed");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kMagic, sizeof kMagic);
  write_u32(out, 1);
  write_u32(out, model.k);
  write_u32(out, model.n);
  write_u32(out, model.hidden_layers);
  write_u32(out, model.hidden_units);
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    out.write(reinterpret_cast<const char*>(model.weights[l].data()),
              static_cast<std::streamsize>(model.weights[l].size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(model.biases[l].data()),
              static_cast<std::streamsize>(model.biases[l].size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

PolicyModel load_checkpoint(const std::string& path, unsigned expect_k, unsigned expect_n) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error("not a policy checkpoint: " + path);
  const std::uint32_t version = read_u32(in);
  if (version != 1) throw std::runtime_error("unsupported checkpoint version");
  PolicyModel m;
  m.k = read_u32(in);
  m.n = read_u32(in);
  m.hidden_layers = read_u32(in);
  m.hidden_units = read_u32(in);
  if (m.k == 0 || m.n <= m.k || m.hidden_layers < 1 || m.hidden_units < 1)
    throw std::runtime_error("corrupt checkpoint header");
  if ((expect_k && m.k != expect_k) || (expect_n && m.n != expect_n))
    throw std::runtime_error("checkpoint was built for (" + std::to_string(m.k) + "," +
                             std::to_string(m.n) + "), expected (" + std::to_string(expect_k) +
                             "," + std::to_string(expect_n) + ")");
  m.input_dim = policy_input_dim(m.k, m.n);
  const auto dims = layer_dims(m);
  for (auto [din, dout] : dims) {
    std::vector<double> w(din * dout), b(dout);
    if (!in.read(reinterpret_cast<char*>(w.data()),
                 static_cast<std::streamsize>(w.size() * sizeof(double))) ||
        !in.read(reinterpret_cast<char*>(b.data()),
                 static_cast<std::streamsize>(b.size() * sizeof(double))))
      throw std::runtime_error("truncated checkpoint");
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
  }
  try {
    validate(m);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("corrupt checkpoint: ") + e.what());
  }
  return m;
}

PolicyForward::PolicyForward(const PolicyModel& model, const LinearCode& code,
                             const FeatureOptions& opts)
    : model_(&model), k_(static_cast<unsigned>(code.k)), n_(static_cast<unsigned>(code.n)) {
  validate(model);
  if (model.input_dim != policy_input_dim(k_, n_))
    throw std::invalid_argument("model input width does not match the code");
  const std::size_t u = model.hidden_units, d = model.input_dim;
  w0t_.resize(d * u);
  for (std::size_t o = 0; o < u; ++o)
    for (std::size_t j = 0; j < d; ++j) w0t_[j * u + o] = model.weights[0][o * d + j];
  base_ = model.biases[0];
  if (opts.include_generator)
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (code.generator.get(i, j))
          axpy(base_.data(), 1.0, w0t_.data() + (k_ + n_ + 1 + i * n_ + j) * u, u);
  h_.resize(u);
  h2_.resize(u);
}

std::vector<double> PolicyForward::frame_offset(std::span<const double> llr_norm) const {
  if (llr_norm.size() != n_) throw std::invalid_argument("llr length != n");
  const std::size_t u = model_->hidden_units;
  std::vector<double> off = base_;
  const std::size_t llr0 = k_ + n_ + 1 + std::size_t{k_} * n_;
  for (std::size_t i = 0; i < n_; ++i)
    if (llr_norm[i] != 0.0) axpy(off.data(), llr_norm[i], w0t_.data() + (llr0 + i) * u, u);
  return off;
}

ActionProbs PolicyForward::priors(std::span<const double> frame_offset, const Tep& tep,
                                  const BitVector& candidate, double distance,
                                  const ActionMask& mask) {
  if (mask.count() == 0) throw std::invalid_argument("no legal action");
  if (mask.count() == 1) {
    ActionProbs pr;
    pr.p[mask.legal[0] ? 0 : 1] = 1.0;
    return pr;
  }
  const std::size_t u = model_->hidden_units;
  if (frame_offset.size() != u) throw std::invalid_argument("bad frame offset");
  if (candidate.size() != n_) throw std::invalid_argument("candidate length != n");

  h_.assign(frame_offset.begin(), frame_offset.end());
  for (unsigned idx : tep.indices) axpy(h_.data(), 1.0, w0t_.data() + (idx - 1) * u, u);
  const auto words = candidate.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t bits = words[w];
    while (bits) {
      const unsigned i = static_cast<unsigned>(w * 64) + std::countr_zero(bits);
      bits &= bits - 1;
      axpy(h_.data(), 1.0, w0t_.data() + (k_ + i) * u, u);
    }
  }
  if (distance != 0.0) axpy(h_.data(), distance, w0t_.data() + (std::size_t{k_} + n_) * u, u);
  for (auto& v : h_) v = v > 0.0 ? v : 0.0;

  for (unsigned l = 1; l < model_->hidden_layers; ++l) {
    const double* w = model_->weights[l].data();
    for (std::size_t o = 0; o < u; ++o) {
      const double acc = model_->biases[l][o] + dot(w + o * u, h_.data(), u);
      h2_[o] = acc > 0.0 ? acc : 0.0;
    }
    h_.swap(h2_);
  }
  const auto& wl = model_->weights.back();
  const auto& bl = model_->biases.back();
  double logits[2];
  logits[0] = bl[0] + dot(wl.data(), h_.data(), u);
  logits[1] = bl[1] + dot(wl.data() + u, h_.data(), u);
  return masked_softmax(logits, mask);
}

}  // namespace tepdec
