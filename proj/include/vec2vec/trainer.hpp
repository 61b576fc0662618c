#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "vec2vec/matrix.hpp"
#include "vec2vec/rng.hpp"
#include "vec2vec/walk.hpp"

namespace vec2vec {

struct TrainConfig {
  std::size_t dims = 16;        // d
  std::size_t negatives = 5;    // k_neg
  double lambda = 0.0;          // L2 coefficient
  double initial_lr = 0.025;
  std::size_t epochs = 5;
  double subsample_t = 0.001;   // 0 disables frequency subsampling
  std::uint64_t seed = 1;
  bool deterministic = true;
  std::size_t threads = 1;

  void validate() const {
    if (dims < 1) throw std::invalid_argument("dims must be >= 1");
    if (negatives < 1) throw std::invalid_argument("negatives must be >= 1");
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    if (initial_lr <= 0.0) throw std::invalid_argument("initial_lr must be > 0");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (subsample_t < 0.0) throw std::invalid_argument("subsample_t must be >= 0");
  }
};

/// One-hidden-layer skip-gram model. W rows are the embeddings; theta rows
/// are the output weights.
struct SkipGramModel {
  DenseMatrix w;      // n x d
  DenseMatrix theta;  // n x d

  std::size_t node_count() const { return w.rows(); }
  std::size_t dims() const { return w.cols(); }

  // Checkpoint: the embedding text format twice, under "W" and "THETA".
  void save(std::ostream& out) const {
    out << "W\n";
    save_embedding(w, out);
    out << "THETA\n";
    save_embedding(theta, out);
  }

  static SkipGramModel load(std::istream& in) {
    auto expect = [&](const char* tag) {
      std::string line;
      if (!std::getline(in, line) || line != tag)
        throw std::runtime_error(std::string("checkpoint: expected section '") + tag + "'");
    };
    SkipGramModel m;
    expect("W");
    m.w = load_embedding(in);
    expect("THETA");
    m.theta = load_embedding(in);
    if (m.theta.rows() != m.w.rows() || m.theta.cols() != m.w.cols())
      throw std::runtime_error("checkpoint: W and THETA shapes differ");
    return m;
  }
};

/// W ~ uniform(-0.5/d, 0.5/d), theta = 0. With zero theta every initial
/// sigmoid is exactly 1/2, which keeps the first updates well conditioned.
inline SkipGramModel init_model(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("init_model: n and d must be >= 1");
  SkipGramModel m;
  m.w = DenseMatrix(n, d);
  m.theta = DenseMatrix(n, d, 0.0);
  Rng rng(Rng::mix(seed, 0x11117));
  double half = 0.5 / static_cast<double>(d);
  for (double& v : m.w.data()) v = (rng.uniform() * 2.0 - 1.0) * half;
  return m;
}

/// Negative-sampling noise distribution: corpus unigram counts raised to
/// the 3/4 power, normalized.
struct NoiseDistribution {
  std::vector<double> probs;       // per node index
  std::vector<double> cumulative;  // running sum, back() == 1

  static NoiseDistribution from_corpus(const WalkCorpus& corpus) {
    if (corpus.walks.empty() || corpus.token_count() == 0)
      throw std::invalid_argument("noise distribution: empty corpus");
    std::vector<double> counts(corpus.node_count, 0.0);
    for (const auto& walk : corpus.walks)
      for (std::uint32_t v : walk) counts[v] += 1.0;

    NoiseDistribution nd;
    nd.probs.resize(counts.size());
    double total = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      nd.probs[i] = counts[i] > 0.0 ? std::pow(counts[i], 0.75) : 0.0;
      total += nd.probs[i];
    }
    nd.cumulative.resize(counts.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      nd.probs[i] /= total;
      acc += nd.probs[i];
      nd.cumulative[i] = acc;
    }
    nd.cumulative.back() = 1.0;
    return nd;
  }

  std::uint32_t sample(Rng& rng) const {
    double u = rng.uniform();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<std::uint32_t>(std::min<std::size_t>(it - cumulative.begin(),
                                                            cumulative.size() - 1));
  }
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(sigma(x)) without overflow for large |x|
inline double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

/// Per-pair negative-sampling loss:
/// -[log s(theta_j . w_i) + sum_neg log s(-theta_neg . w_i)]
/// + (lambda/2)(|w_i|^2 + |theta_j|^2 + sum |theta_neg|^2).
inline double pair_loss(const SkipGramModel& model, std::size_t center, std::size_t context,
                        const std::vector<std::uint32_t>& negatives, double lambda) {
  const auto wi = model.w.row(center);
  double loss = -log_sigmoid(dot(model.theta.row(context), wi));
  for (std::uint32_t neg : negatives) loss -= log_sigmoid(-dot(model.theta.row(neg), wi));
  if (lambda > 0.0) {
    double reg = dot(wi, wi) + dot(model.theta.row(context), model.theta.row(context));
    for (std::uint32_t neg : negatives) reg += dot(model.theta.row(neg), model.theta.row(neg));
    loss += 0.5 * lambda * reg;
  }
  return loss;
}

namespace detail {

// Analytic gradients of pair_loss at the current parameters. Output rows
// with a repeated negative index accumulate, matching the loss which counts
// the row once per occurrence.
struct PairGradients {
  std::vector<double> grad_w;  // d
  std::vector<std::pair<std::uint32_t, std::vector<double>>> grad_theta;

  std::vector<double>& theta_slot(std::uint32_t row, std::size_t d) {
    for (auto& [idx, g] : grad_theta)
      if (idx == row) return g;
    grad_theta.emplace_back(row, std::vector<double>(d, 0.0));
    return grad_theta.back().second;
  }
};

inline PairGradients pair_gradients(const SkipGramModel& model, std::size_t center,
                                    std::size_t context,
                                    const std::vector<std::uint32_t>& negatives, double lambda) {
  const std::size_t d = model.dims();
  const auto wi = model.w.row(center);
  PairGradients g;
  g.grad_w.assign(d, 0.0);

  auto accumulate = [&](std::uint32_t out_row, double label) {
    const auto th = model.theta.row(out_row);
    double score = sigmoid(dot(th, wi)) - label;  // d loss / d (theta.w)
    if (!std::isfinite(score))
      throw std::runtime_error("non-finite activation at output row " + std::to_string(out_row));
    auto& gt = g.theta_slot(out_row, d);
    for (std::size_t c = 0; c < d; ++c) {
      gt[c] += score * wi[c] + lambda * th[c];
      g.grad_w[c] += score * th[c];
    }
  };
  accumulate(static_cast<std::uint32_t>(context), 1.0);
  for (std::uint32_t neg : negatives) accumulate(neg, 0.0);
  for (std::size_t c = 0; c < d; ++c) g.grad_w[c] += lambda * wi[c];
  return g;
}

}  // namespace detail

/// One SGD step on a (center, context, negatives) sample. Touches only
/// row `center` of W and the context/negative rows of theta.
inline void sgd_step(SkipGramModel& model, std::size_t center, std::size_t context,
                     const std::vector<std::uint32_t>& negatives, double lr, double lambda) {
  auto g = detail::pair_gradients(model, center, context, negatives, lambda);
  const std::size_t d = model.dims();
  auto wi = model.w.row(center);
  for (std::size_t c = 0; c < d; ++c) wi[c] -= lr * g.grad_w[c];
  for (const auto& [row, gt] : g.grad_theta) {
    auto th = model.theta.row(row);
    for (std::size_t c = 0; c < d; ++c) th[c] -= lr * gt[c];
  }
}

/// Drop each token occurrence of node x with probability
/// max(0, 1 - sqrt(t / freq(x))); freq is the corpus relative frequency.
inline WalkCorpus subsample_corpus(const WalkCorpus& corpus, double t, std::uint64_t seed) {
  if (t < 0.0) throw std::invalid_argument("subsample_corpus: t must be >= 0");
  if (t == 0.0) return corpus;

  std::vector<double> freq(corpus.node_count, 0.0);
  double total = static_cast<double>(corpus.token_count());
  for (const auto& walk : corpus.walks)
    for (std::uint32_t v : walk) freq[v] += 1.0;
  std::vector<double> keep(corpus.node_count, 1.0);
  for (std::size_t i = 0; i < freq.size(); ++i)
    if (freq[i] > 0.0) keep[i] = std::min(1.0, std::sqrt(t * total / freq[i]));

  Rng rng(Rng::mix(seed, 0x5ab5));
  WalkCorpus out;
  out.node_count = corpus.node_count;
  out.walks.reserve(corpus.walks.size());
  for (const auto& walk : corpus.walks) {
    std::vector<std::uint32_t> kept;
    kept.reserve(walk.size());
    for (std::uint32_t v : walk)
      if (rng.uniform() < keep[v]) kept.push_back(v);
    out.walks.push_back(std::move(kept));
  }
  return out;
}

namespace detail {

inline std::uint32_t draw_negative(const NoiseDistribution& noise, std::uint32_t positive,
                                   Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::uint32_t neg = noise.sample(rng);
    if (neg != positive) return neg;
  }
  return noise.sample(rng);  // degenerate one-node distribution
}

struct EpochPlan {
  WalkCorpus filtered;
  const WalkCorpus* active = nullptr;
  std::size_t pair_count = 0;
};

inline EpochPlan plan_epoch(const WalkCorpus& corpus, const TrainConfig& cfg,
                            std::size_t window, std::size_t epoch) {
  EpochPlan plan;
  if (cfg.subsample_t > 0.0) {
    plan.filtered = subsample_corpus(corpus, cfg.subsample_t, Rng::mix(cfg.seed, 0xeb0c, epoch));
    plan.active = &plan.filtered;
  } else {
    plan.active = &corpus;
  }
  plan.pair_count = context_pair_count(*plan.active, window);
  return plan;
}

}  // namespace detail

/// Train the skip-gram model over the walk corpus: per epoch, optionally
/// subsample tokens, stream context pairs, draw negatives from the noise
/// distribution (resampling any draw equal to the positive context), and
/// apply SGD with the learning rate decayed linearly to initial_lr / 100.
inline SkipGramModel train(const WalkCorpus& corpus, const TrainConfig& cfg,
                           std::size_t window = 5) {
  cfg.validate();
  if (corpus.walks.empty()) throw std::invalid_argument("train: empty corpus");
  const std::size_t n = corpus.node_count;
  if (cfg.dims >= n)
    throw std::invalid_argument("train: dims " + std::to_string(cfg.dims) +
                                " must be smaller than node count " + std::to_string(n));

  SkipGramModel model = init_model(n, cfg.dims, cfg.seed);
  NoiseDistribution noise = NoiseDistribution::from_corpus(corpus);
  const double lr_floor = cfg.initial_lr / 100.0;
  const double total_epochs = static_cast<double>(cfg.epochs);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto plan = detail::plan_epoch(corpus, cfg, window, epoch);
    if (plan.pair_count == 0) continue;

    auto run_range = [&](std::size_t walk_lo, std::size_t walk_hi, std::uint64_t stream) {
      Rng rng(Rng::mix(cfg.seed, 0x7ea1 + epoch, stream));
      std::vector<std::uint32_t> negatives(cfg.negatives);
      std::size_t done = 0;
      for (std::size_t w = walk_lo; w < walk_hi; ++w) {
        const auto& walk = plan.active->walks[w];
        const std::size_t len = walk.size();
        for (std::size_t j = 0; j < len; ++j) {
          std::size_t lo = j >= window ? j - window : 0;
          std::size_t hi = std::min(len == 0 ? 0 : len - 1, j + window);
          for (std::size_t m = lo; m <= hi; ++m) {
            if (m == j) continue;
            double progress = (static_cast<double>(epoch) +
                               static_cast<double>(done) / static_cast<double>(plan.pair_count)) /
                              total_epochs;
            double lr = std::max(lr_floor, cfg.initial_lr * (1.0 - progress));
            std::uint32_t center = walk[j];
            std::uint32_t context = walk[m];
            for (std::size_t q = 0; q < cfg.negatives; ++q)
              negatives[q] = detail::draw_negative(noise, context, rng);
            sgd_step(model, center, context, negatives, lr, cfg.lambda);
            ++done;
          }
        }
        if ((w & 0x3f) == 0 && !std::isfinite(model.w(walk.empty() ? 0 : walk[0], 0)))
          throw std::runtime_error("train: non-finite embedding during epoch " +
                                   std::to_string(epoch));
      }
    };

    if (cfg.deterministic || cfg.threads <= 1) {
      run_range(0, plan.active->walks.size(), 0);
    } else {
      // Lock-free parallel mode: workers update shared rows; occasional lost
      // updates are tolerated, the contract is statistical convergence.
      std::vector<std::thread> pool;
      std::size_t nw = plan.active->walks.size();
      std::size_t chunk = (nw + cfg.threads - 1) / cfg.threads;
      for (std::size_t t = 0; t < cfg.threads; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(nw, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi, t] { run_range(lo, hi, t + 1); });
      }
      for (auto& th : pool) th.join();
    }
  }

  if (!model.w.all_finite() || !model.theta.all_finite())
    throw std::runtime_error("train: non-finite values in final model");
  return model;
}

}  // namespace vec2vec
