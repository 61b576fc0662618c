// vec2vec command-line front end: reduce / evaluate / bench-scaling /
// synth-blobs. Exit codes: 0 success, 1 runtime failure, 2 flag misuse.

#include <cstdlib>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vec2vec/vec2vec.hpp"

namespace {

struct CommonOpts {
  std::string input;
  std::size_t dims = 16;
  std::size_t topk = 5;
  double epsilon = 0.0;
  bool use_epsilon = false;
  std::size_t walks = 10;
  std::size_t walk_length = 40;
  std::size_t window = 5;
  std::size_t negatives = 5;
  double lambda = 0.0;
  std::size_t epochs = 5;
  double lr = 0.025;
  double subsample = 0.001;
  std::uint64_t seed = 1;
  std::string mode = "sample";
  bool deterministic = false;
  std::size_t threads = 0;
};

std::size_t resolve_threads(std::size_t flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("VEC2VEC_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

vec2vec::Vec2vecConfig make_config(const CommonOpts& o) {
  vec2vec::Vec2vecConfig cfg;
  cfg.neighbor_rule = o.use_epsilon ? vec2vec::NeighborRule::eps(o.epsilon)
                                    : vec2vec::NeighborRule::top_k(o.topk);
  cfg.walk.walks_per_node = o.walks;
  cfg.walk.walk_length = o.walk_length;
  cfg.walk.window = o.window;
  cfg.walk.seed = o.seed;
  cfg.train.dims = o.dims;
  cfg.train.negatives = o.negatives;
  cfg.train.lambda = o.lambda;
  cfg.train.initial_lr = o.lr;
  cfg.train.epochs = o.epochs;
  cfg.train.subsample_t = o.subsample;
  cfg.train.seed = o.seed;
  cfg.train.deterministic = o.deterministic;
  cfg.mode = o.mode == "feature" ? vec2vec::ReduceMode::feature_space
                                 : vec2vec::ReduceMode::sample_space;
  cfg.threads = resolve_threads(o.threads);
  return cfg;
}

void add_common_flags(CLI::App* cmd, CommonOpts& o, bool need_input = true) {
  auto* in = cmd->add_option("--input", o.input, "Input CSV file");
  if (need_input) in->required()->check(CLI::ExistingFile);
  cmd->add_option("--dims", o.dims, "Target dimensionality d")->check(CLI::PositiveNumber);
  auto* tk = cmd->add_option("--topk", o.topk, "Topk neighbor rule")->check(CLI::PositiveNumber);
  auto* ep = cmd->add_option("--epsilon", o.epsilon, "Epsilon neighbor rule");
  ep->excludes(tk);
  cmd->add_option("--walks", o.walks, "Walks per node r")->check(CLI::PositiveNumber);
  cmd->add_option("--walk-length", o.walk_length, "Walk length l")->check(CLI::PositiveNumber);
  cmd->add_option("--window", o.window, "Context window c")->check(CLI::PositiveNumber);
  cmd->add_option("--negatives", o.negatives, "Negative samples per pair")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--lambda", o.lambda, "L2 coefficient")->check(CLI::NonNegativeNumber);
  cmd->add_option("--epochs", o.epochs, "Training epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", o.lr, "Initial learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--subsample", o.subsample, "Frequency subsampling threshold (0 disables)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--mode", o.mode, "sample | feature")
      ->check(CLI::IsMember({"sample", "feature"}));
  cmd->add_flag("--deterministic", o.deterministic, "Single-worker reproducible paths");
  cmd->add_option("--threads", o.threads, "Worker count (VEC2VEC_THREADS fallback)");
  cmd->callback([&o, ep] {
    if (ep->count() > 0) o.use_epsilon = true;
  });
}

void fill_common_manifest(vec2vec::RunManifest& man, const CommonOpts& o,
                          const vec2vec::StageTimings& timings) {
  man.set("input", o.input);
  man.set("input_digest", vec2vec::file_digest(o.input));
  man.set("dims", o.dims);
  if (o.use_epsilon)
    man.set("epsilon", o.epsilon);
  else
    man.set("topk", o.topk);
  man.set("walks", o.walks);
  man.set("walk_length", o.walk_length);
  man.set("window", o.window);
  man.set("negatives", o.negatives);
  man.set("lambda", o.lambda);
  man.set("epochs", o.epochs);
  man.set("lr", o.lr);
  man.set("subsample", o.subsample);
  man.set("seed", static_cast<std::size_t>(o.seed));
  man.set("mode", o.mode);
  man.set("deterministic", std::string(o.deterministic ? "true" : "false"));
  man.set("time_graph_seconds", timings.graph_seconds);
  man.set("time_walk_seconds", timings.walk_seconds);
  man.set("time_train_seconds", timings.train_seconds);
  man.set("time_total_seconds", timings.total_seconds);
}

int run_reduce(const CommonOpts& o, const std::string& output, int labels_column) {
  auto m = labels_column >= 0
               ? vec2vec::load_csv(o.input, false, static_cast<std::size_t>(labels_column))
               : vec2vec::load_csv(o.input, false);
  auto cfg = make_config(o);
  vec2vec::StageTimings timings;
  auto z = vec2vec::reduce(m, cfg, &timings);
  vec2vec::save_embedding(z, output);

  vec2vec::RunManifest man;
  man.set("command", std::string("reduce"));
  fill_common_manifest(man, o, timings);
  man.set("output", output);
  man.write(output + ".manifest");
  return 0;
}

int run_evaluate(const CommonOpts& o, const std::string& method, int labels_column,
                 std::size_t folds, std::size_t clusters, const std::string& report_path) {
  if (labels_column < 0) {
    std::cerr << "evaluate: --labels-column is required\n";
    return 2;
  }
  auto m = vec2vec::load_csv(o.input, false, static_cast<std::size_t>(labels_column));
  const auto& labels = m.labels();
  std::set<int> distinct(labels.begin(), labels.end());
  if (clusters == 0) clusters = distinct.size();

  vec2vec::StageTimings timings;
  vec2vec::detail::StageClock eval_clock;
  vec2vec::DenseMatrix z;
  if (method == "vec2vec") {
    z = vec2vec::reduce(m, make_config(o), &timings);
  } else if (method == "pca") {
    z = vec2vec::pca_baseline(m, o.dims);
    timings.total_seconds = eval_clock.lap();
    timings.train_seconds = timings.total_seconds;
  } else {  // identity: evaluate the raw matrix as a sanity anchor
    z = m;
    timings.total_seconds = eval_clock.lap();
  }

  vec2vec::EvalReport report;
  report.method = method;
  report.dataset = o.input;
  report.dims = method == "identity" ? m.cols() : o.dims;
  report.folds = folds;

  vec2vec::detail::StageClock clock;
  auto cv = vec2vec::knn_cv_accuracy(z, labels, folds);
  report.fold_accuracies = cv.fold_accuracies;
  report.mean_accuracy = cv.mean_accuracy;
  report.two_std = cv.two_std;
  auto km = vec2vec::kmeans(z, clusters, o.seed);
  report.ari = vec2vec::adjusted_rand_index(labels, km.labels);
  std::size_t np_k = std::min<std::size_t>(10, m.rows() - 1);
  report.neighborhood_preservation_rate = vec2vec::neighborhood_preservation(m, z, np_k);
  report.time_eval_seconds = clock.lap();
  report.time_graph_seconds = timings.graph_seconds;
  report.time_walk_seconds = timings.walk_seconds;
  report.time_train_seconds = timings.train_seconds;
  report.time_embed_seconds = timings.total_seconds;

  {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + report_path);
    report.write_keyvalue(out);
  }
  {
    std::ofstream out(report_path + ".tsv");
    report.write_record(out);
  }
  report.write_keyvalue(std::cout);

  vec2vec::RunManifest man;
  man.set("command", std::string("evaluate"));
  fill_common_manifest(man, o, timings);
  man.set("method", method);
  man.set("folds", folds);
  man.set("clusters", clusters);
  man.set("output", report_path);
  man.write(report_path + ".manifest");
  return 0;
}

int run_bench(const CommonOpts& o, const std::vector<std::size_t>& n_list,
              const std::vector<std::size_t>& d_list, const std::string& output) {
  bool bad_grid = n_list.empty() || d_list.empty();
  for (std::size_t n : n_list) bad_grid = bad_grid || n < 2;
  for (std::size_t d : d_list) bad_grid = bad_grid || d < 1;
  if (bad_grid) {
    std::cerr << "bench-scaling: empty or invalid size grid\n";
    return 2;
  }
  std::ostringstream table;
  table << "n\tD\tgraph_s\twalk_s\ttrain_s\ttotal_s\n";
  for (std::size_t n : n_list) {
    for (std::size_t dim : d_list) {
      auto m = vec2vec::make_blobs(n, dim, std::min<std::size_t>(3, dim), 10.0, o.seed);
      auto cfg = make_config(o);
      vec2vec::StageTimings t;
      (void)vec2vec::reduce(m, cfg, &t);
      table << n << '\t' << dim << '\t' << t.graph_seconds << '\t' << t.walk_seconds << '\t'
            << t.train_seconds << '\t' << t.total_seconds << '\n';
    }
  }
  std::cout << table.str();
  if (!output.empty()) {
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot open file for writing: " + output);
    out << table.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vec2vec: local similarity-preserving dimensionality reduction"};
  app.require_subcommand(1);

  CommonOpts reduce_opts;
  std::string reduce_output;
  int reduce_labels_column = -1;
  auto* cmd_reduce = app.add_subcommand("reduce", "Embed a CSV matrix");
  add_common_flags(cmd_reduce, reduce_opts);
  cmd_reduce->add_option("--output", reduce_output, "Embedding output path")->required();
  cmd_reduce->add_option("--labels-column", reduce_labels_column,
                         "Column to strip as labels before embedding");

  CommonOpts eval_opts;
  std::string eval_method = "vec2vec";
  int eval_labels_column = -1;
  std::size_t eval_folds = 4;
  std::size_t eval_clusters = 0;
  std::string eval_report;
  auto* cmd_eval = app.add_subcommand("evaluate", "Classification/clustering evaluation");
  add_common_flags(cmd_eval, eval_opts);
  cmd_eval->add_option("--labels-column", eval_labels_column, "Label column index")->required();
  cmd_eval->add_option("--method", eval_method, "vec2vec | pca | identity")
      ->check(CLI::IsMember({"vec2vec", "pca", "identity"}));
  cmd_eval->add_option("--folds", eval_folds, "CV folds")->check(CLI::PositiveNumber);
  cmd_eval->add_option("--clusters", eval_clusters, "k-means cluster count (default: #classes)");
  cmd_eval->add_option("--report", eval_report, "Report output path");

  CommonOpts bench_opts;
  std::vector<std::size_t> bench_n{1000};
  std::vector<std::size_t> bench_d{100};
  std::string bench_output;
  auto* cmd_bench = app.add_subcommand("bench-scaling", "Wall-clock scaling grid on blobs");
  add_common_flags(cmd_bench, bench_opts, /*need_input=*/false);
  cmd_bench->add_option("--n-list", bench_n, "Row counts, comma separated")->delimiter(',');
  cmd_bench->add_option("--d-list", bench_d, "Input dimensionalities, comma separated")
      ->delimiter(',');
  cmd_bench->add_option("--output", bench_output, "Timing table output path");

  std::size_t synth_n = 300, synth_dims = 100, synth_clusters = 3;
  double synth_sep = 10.0;
  std::uint64_t synth_seed = 1;
  std::string synth_output;
  auto* cmd_synth = app.add_subcommand("synth-blobs", "Write a labeled Gaussian-blob CSV");
  cmd_synth->add_option("--n", synth_n, "Rows")->check(CLI::PositiveNumber);
  cmd_synth->add_option("--dims", synth_dims, "Columns")->check(CLI::PositiveNumber);
  cmd_synth->add_option("--clusters", synth_clusters, "Cluster count")->check(CLI::PositiveNumber);
  cmd_synth->add_option("--sep", synth_sep, "Center separation")->check(CLI::PositiveNumber);
  cmd_synth->add_option("--seed", synth_seed, "RNG seed");
  cmd_synth->add_option("--output", synth_output, "CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_reduce->parsed()) return run_reduce(reduce_opts, reduce_output, reduce_labels_column);
    if (cmd_eval->parsed()) {
      if (eval_report.empty()) eval_report = eval_opts.input + ".report";
      return run_evaluate(eval_opts, eval_method, eval_labels_column, eval_folds, eval_clusters,
                          eval_report);
    }
    if (cmd_bench->parsed()) return run_bench(bench_opts, bench_n, bench_d, bench_output);
    if (cmd_synth->parsed()) {
      auto m = vec2vec::make_blobs(synth_n, synth_dims, synth_clusters, synth_sep, synth_seed);
      vec2vec::save_csv(m, synth_output);
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
