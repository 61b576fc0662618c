#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>

#include "vec2vec/graph.hpp"
#include "vec2vec/matrix.hpp"
#include "vec2vec/trainer.hpp"
#include "vec2vec/walk.hpp"

namespace vec2vec {

enum class ReduceMode { sample_space, feature_space };

struct Vec2vecConfig {
  NeighborRule neighbor_rule = NeighborRule::top_k(5);
  WalkConfig walk;
  TrainConfig train;
  ReduceMode mode = ReduceMode::sample_space;
  std::size_t threads = 1;
};

struct StageTimings {
  double graph_seconds = 0.0;
  double walk_seconds = 0.0;
  double train_seconds = 0.0;
  double total_seconds = 0.0;
};

namespace detail {

class StageClock {
 public:
  StageClock() : last_(std::chrono::steady_clock::now()) {}
  double lap() {
    auto now = std::chrono::steady_clock::now();
    double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_;
};

inline DenseMatrix reduce_rows(const DenseMatrix& m, const Vec2vecConfig& cfg,
                               StageTimings* timings) {
  StageClock clock;
  std::size_t threads = cfg.train.deterministic ? 1 : std::max<std::size_t>(1, cfg.threads);

  SimilarityGraph graph = build_graph(m, cfg.neighbor_rule, threads);
  if (timings) timings->graph_seconds = clock.lap();

  WalkCorpus corpus = generate_corpus(graph, cfg.walk, threads);
  if (timings) timings->walk_seconds = clock.lap();

  TrainConfig tc = cfg.train;
  tc.threads = threads;
  SkipGramModel model = train(corpus, tc, cfg.walk.window);
  if (timings) timings->train_seconds = clock.lap();
  return model.w;
}

}  // namespace detail

/// End-to-end reduction: graph -> walks -> skip-gram embedding. In
/// feature-space mode the same pipeline runs on M^T and sample embeddings
/// are recovered as M * Z.
inline DenseMatrix reduce(const DenseMatrix& m, const Vec2vecConfig& cfg,
                          StageTimings* timings = nullptr) {
  if (m.rows() < 2) throw std::invalid_argument("reduce: need at least 2 rows");
  if (!m.all_finite()) throw std::invalid_argument("reduce: input contains non-finite values");
  std::size_t input_width =
      cfg.mode == ReduceMode::sample_space ? m.rows() : m.cols();
  if (cfg.train.dims >= input_width)
    throw std::invalid_argument(
        "reduce: dims " + std::to_string(cfg.train.dims) +
        " must be smaller than the one-hot input size " + std::to_string(input_width));

  detail::StageClock total;
  DenseMatrix z;
  if (cfg.mode == ReduceMode::sample_space) {
    z = detail::reduce_rows(m, cfg, timings);
  } else {
    z = transpose_reduce(
        m, [&](const DenseMatrix& mt) { return detail::reduce_rows(mt, cfg, timings); });
  }
  if (timings) timings->total_seconds = total.lap();
  if (m.has_labels()) z.set_labels(m.labels());
  return z;
}

}  // namespace vec2vec
