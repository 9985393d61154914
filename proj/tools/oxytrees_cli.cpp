// oxytrees command-line tool: fit, predict, cv, sweep-leaf, sweep-trees, bench, gen.
#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oxytrees/oxytrees.hpp"

namespace {

using namespace oxytrees;
using Json = nlohmann::json;

// Appends "--key value" for every key of the --config JSON object that is not
// already given on the command line. Arrays become comma lists, true
// becomes a bare flag and false is dropped.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ContractError("config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw ContractError("config '" + path + "': expected a JSON object");
  auto given = [&](const std::string& flag) {
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  auto scalar = [&](const Json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    throw ContractError("config '" + path + "': unsupported value " + v.dump());
  };
  std::vector<std::string> extra;
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + scalar(v);
      extra.push_back(flag);
      extra.push_back(joined);
    } else {
      extra.push_back(flag);
      extra.push_back(scalar(value));
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

struct DataFlags {
  std::string x1, x2, y;
  bool precomputed = false;

  void add(CLI::App* app) {
    app->add_option("--x1", x1, "Row-domain features (TSV)")->required();
    app->add_option("--x2", x2, "Column-domain features (TSV)")->required();
    app->add_option("--y", y, "Binary interaction matrix (TSV)")->required();
    app->add_flag("--precomputed", precomputed, "x1/x2 are square similarity matrices");
  }

  BipartiteDataset load() const { return load_dataset(x1, x2, y, precomputed); }
};

struct ForestFlags {
  Index trees = 200;
  Index min_rows = 5, min_cols = 5;
  Index max_features_rows = 0, max_features_cols = 0;
  std::string leaf = "rls_kron";
  double alpha = 1.0;
  std::string kernel = "auto";
  double gamma = 0.0;
  std::string evaluator = "proxy";
  bool exhaustive = false;
  bool bootstrap = false;
  bool deep = false;
  bool node_norm = false;

  void add(CLI::App* app, bool with_trees = true) {
    if (with_trees) app->add_option("--trees", trees, "Number of trees")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--min-rows", min_rows, "Minimum leaf rows")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--min-cols", min_cols, "Minimum leaf columns")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--max-features-rows", max_features_rows, "Row features drawn per node (0: ceil sqrt)");
    app->add_option("--max-features-cols", max_features_cols, "Column features drawn per node (0: ceil sqrt)");
    app->add_option("--leaf", leaf, "Leaf model")->capture_default_str()->check(CLI::IsMember({"rls_kron", "mean"}));
    app->add_option("--alpha", alpha, "RLS-Kron regularization")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--kernel", kernel, "Leaf kernel on raw features")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "rbf", "linear", "precomputed"}));
    app->add_option("--gamma", gamma, "RBF width (0: 1/width)");
    app->add_option("--evaluator", evaluator, "Split evaluator")
        ->capture_default_str()
        ->check(CLI::IsMember({"proxy", "naive"}));
    app->add_flag("--exhaustive-thresholds", exhaustive, "Midpoint thresholds instead of one random draw");
    app->add_flag("--bootstrap", bootstrap, "Per-axis bootstrap of training instances");
    app->add_flag("--deep", deep, "Grow to purity (1x1 minimum leaves)");
    app->add_flag("--node-norm", node_norm, "Normalize impurity gain by node size");
  }

  ForestParams params(Index threads, Index width1, Index width2, bool precomputed) const {
    ForestParams p;
    p.n_trees = trees;
    p.threads = threads;
    p.bootstrap = bootstrap;
    TreeParams& t = p.tree;
    t.min_rows = min_rows;
    t.min_cols = min_cols;
    t.max_features_rows = max_features_rows;
    t.max_features_cols = max_features_cols;
    t.leaf = leaf == "mean" ? LeafKind::Mean : LeafKind::RlsKron;
    t.alpha = alpha;
    t.evaluator = evaluator == "naive" ? SplitEvaluator::Naive : SplitEvaluator::Proxy;
    t.exhaustive_thresholds = exhaustive;
    t.norm = node_norm ? NormMode::Node : NormMode::Global;
    auto kernel_for = [&](Index width) -> std::optional<KernelConfig> {
      if (kernel == "precomputed") return KernelConfig::precomputed();
      if (kernel == "linear") return KernelConfig::linear();
      if (kernel == "rbf") return KernelConfig::rbf(gamma > 0.0 ? gamma : 1.0 / static_cast<double>(std::max<Index>(width, 1)));
      if (gamma > 0.0 && !precomputed) return KernelConfig::rbf(gamma);
      return std::nullopt;
    };
    t.kernel1 = kernel_for(width1);
    t.kernel2 = kernel_for(width2);
    if (deep) t = TreeParams::deep(t);
    return p;
  }
};


std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

// Writes text to `path`, or to stdout when path is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

void emit_json(const std::string& path, const Json& j) {
  if (!path.empty()) emit(path, j.dump(2) + "\n");
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
std::string optional_tsv(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

Setting parse_setting(const std::string& s) {
  if (s == "TD") return Setting::TD;
  if (s == "LT") return Setting::LT;
  if (s == "TL") return Setting::TL;
  if (s == "TT") return Setting::TT;
  throw ContractError("unknown setting '" + s + "' (expected TD, LT, TL or TT)");
}

Metric parse_metric(const std::string& s) {
  if (s == "auroc" || s == "AUROC") return Metric::Auroc;
  if (s == "auprc" || s == "AUPRC") return Metric::Auprc;
  throw ContractError("unknown metric '" + s + "'");
}

const char* leaf_name(LeafKind k) { return k == LeafKind::Mean ? "mean" : "rls_kron"; }

struct Outputs {
  std::string tsv, json;

  void add(CLI::App* app) {
    app->add_option("--out", tsv, "TSV output (default: stdout)");
    app->add_option("--json", json, "JSON report output");
  }
};

struct CvFlags {
  Index k1 = 2, k2 = 2;
  std::vector<double> pmp{0.0, 0.25, 0.5, 0.75};

  void add(CLI::App* app, bool with_pmp_list = true) {
    app->add_option("--k1", k1, "Row folds")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--k2", k2, "Column folds")->capture_default_str()->check(CLI::PositiveNumber);
    if (with_pmp_list) {
      app->add_option("--pmp", pmp, "Positive-masking percentages in [0,1)")
          ->delimiter(',')
          ->capture_default_str()
          ->check(CLI::Range(0.0, 1.0));
    } else {
      pmp = {0.0};
      app->add_option("--pmp", pmp, "Positive-masking percentage in [0,1)")
          ->expected(1)
          ->capture_default_str()
          ->check(CLI::Range(0.0, 1.0));
    }
  }

  CvOptions options(std::uint64_t seed) const {
    CvOptions o;
    o.k1 = k1;
    o.k2 = k2;
    o.pmp_grid = pmp;
    o.seed = seed;
    return o;
  }
};

std::string report_tsv(const EvaluationReport& r) {
  std::ostringstream out;
  out << "setting\tfold\tpmp\tmetric\tvalue\n";
  for (const auto& e : r.entries) {
    out << to_string(e.setting) << '\t' << e.fold << '\t' << format_number(e.pmp) << '\t' << to_string(e.metric)
        << '\t' << optional_tsv(e.value) << '\n';
  }
  return out.str();
}

Json report_json(const EvaluationReport& r, std::span<const double> pmp_grid) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"setting", to_string(e.setting)},
                       {"fold", e.fold},
                       {"pmp", e.pmp},
                       {"metric", to_string(e.metric)},
                       {"value", optional_json(e.value)}});
  }
  Json summary = Json::array();
  for (double pmp : pmp_grid) {
    for (Metric m : {Metric::Auroc, Metric::Auprc}) {
      for (Setting s : {Setting::TD, Setting::LT, Setting::TL, Setting::TT}) {
        summary.push_back({{"setting", to_string(s)},
                           {"pmp", pmp},
                           {"metric", to_string(m)},
                           {"mean", optional_json(r.mean(s, m, pmp))}});
      }
      summary.push_back({{"setting", "LT+TL"},
                         {"pmp", pmp},
                         {"metric", to_string(m)},
                         {"mean", optional_json(r.semi_inductive_mean(m, pmp))}});
    }
  }
  return {{"metadata", r.metadata}, {"entries", std::move(entries)}, {"summary", std::move(summary)}};
}

// --threads wins; otherwise OXYFOREST_THREADS; otherwise 1.
Index resolve_threads(bool flag_given, Index flag) {
  if (flag_given) return flag;
  const char* env = std::getenv("OXYFOREST_THREADS");
  if (!env || !*env) return 1;
  const std::string text(env);
  Index value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 1) {
    throw ContractError("OXYFOREST_THREADS must be a positive integer, got '" + text + "'");
  }
  return value;
}

int run(int argc, char** argv) {
  CLI::App app{"Oxytrees: biclustering forests for bipartite interaction prediction", "oxytrees"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  Index threads = 1;
  std::string config;
  std::vector<CLI::Option*> thread_flags;
  auto add_common = [&](CLI::App* sub, bool randomized) {
    sub->add_option("--config", config, "JSON file of option values; flags take precedence");
    if (randomized) sub->add_option("--seed", seed, "Random seed")->required();
    thread_flags.push_back(
        sub->add_option("--threads", threads, "Worker threads (default: OXYFOREST_THREADS or 1)")->check(CLI::PositiveNumber));
  };

  // fit
  auto* fit = app.add_subcommand("fit", "Train a forest and save it as JSON");
  DataFlags fit_data;
  ForestFlags fit_forest_flags;
  std::string fit_out;
  fit_data.add(fit);
  fit_forest_flags.add(fit);
  fit->add_option("--out", fit_out, "Model output path")->required();
  add_common(fit, true);

  // predict
  auto* pred = app.add_subcommand("predict", "Score every test dyad with a saved model");
  std::string model_path, pred_x1, pred_x2, pred_out;
  std::optional<Index> first_k;
  pred->add_option("--model", model_path, "Model JSON")->required();
  pred->add_option("--x1", pred_x1, "Row test features (TSV)")->required();
  pred->add_option("--x2", pred_x2, "Column test features (TSV)")->required();
  pred->add_option("--out", pred_out, "Score matrix output (default: stdout)");
  pred->add_option("--first-k", first_k, "Use only the first k trees")->check(CLI::PositiveNumber);
  add_common(pred, false);

  // cv
  auto* cv = app.add_subcommand("cv", "Bipartite cross-validation over a PMP grid");
  DataFlags cv_data;
  ForestFlags cv_forest;
  CvFlags cv_flags;
  Outputs cv_out;
  cv_data.add(cv);
  cv_forest.add(cv);
  cv_flags.add(cv);
  cv_out.add(cv);
  add_common(cv, true);

  // sweep-leaf
  auto* sweep_leaf = app.add_subcommand("sweep-leaf", "Scores as a function of minimum leaf dimensions");
  DataFlags sl_data;
  ForestFlags sl_forest;
  CvFlags sl_cv;
  Outputs sl_out;
  std::vector<Index> sl_dims{2, 5, 10, 20};
  std::vector<std::string> sl_variants{"rls_kron", "mean"};
  std::vector<std::string> sl_settings{"TT", "LT", "TL"};
  sl_data.add(sweep_leaf);
  sl_forest.add(sweep_leaf);
  sl_cv.add(sweep_leaf, false);
  sl_out.add(sweep_leaf);
  sweep_leaf->add_option("--dims", sl_dims, "Minimum leaf dimensions")->delimiter(',')->capture_default_str();
  sweep_leaf->add_option("--variants", sl_variants, "Leaf variants")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::IsMember({"rls_kron", "mean"}));
  sweep_leaf->add_option("--settings", sl_settings, "Settings to report")->delimiter(',')->capture_default_str();
  add_common(sweep_leaf, true);

  // sweep-trees
  auto* sweep_trees = app.add_subcommand("sweep-trees", "Expected number of trees to reach a share of the final score");
  DataFlags st_data;
  ForestFlags st_forest;
  CvFlags st_cv;
  Outputs st_out;
  Index st_repeats = 50;
  double st_target = 0.98;
  std::string st_metric = "auprc";
  st_data.add(sweep_trees);
  st_forest.add(sweep_trees);
  st_cv.add(sweep_trees, false);
  st_out.add(sweep_trees);
  sweep_trees->add_option("--repeats", st_repeats, "Random tree orders")->capture_default_str()->check(CLI::PositiveNumber);
  sweep_trees->add_option("--target", st_target, "Fraction of the final score")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  sweep_trees->add_option("--metric", st_metric, "auroc or auprc")->capture_default_str();
  add_common(sweep_trees, true);

  // bench
  auto* bench = app.add_subcommand("bench", "Timing benchmarks (single-threaded)");
  std::string bench_kind = "build";
  std::vector<Index> bench_sizes;
  Index bench_repeats = 3, bench_n_test = 512, bench_features = 16, bench_min_leaf = 5;
  bool bench_no_naive = false, bench_no_deep = false;
  Outputs bench_out;
  bench->add_option("--kind", bench_kind, "build or inference")
      ->capture_default_str()
      ->check(CLI::IsMember({"build", "inference"}));
  bench->add_option("--sizes", bench_sizes, "Size grid (n for build, n_train for inference)")->delimiter(',');
  bench->add_option("--repeats", bench_repeats, "Timed repeats per point")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--n-test", bench_n_test, "Test instances per domain (inference)")->capture_default_str();
  bench->add_option("--features", bench_features, "Features per domain (inference)")->capture_default_str();
  bench->add_option("--min-leaf", bench_min_leaf, "Minimum leaf dimension")->capture_default_str();
  bench->add_flag("--no-naive", bench_no_naive, "Skip the naive builder");
  bench->add_flag("--no-deep", bench_no_deep, "Skip the deep builder");
  bench_out.add(bench);
  add_common(bench, true);

  // gen
  auto* gen = app.add_subcommand("gen", "Write a synthetic dataset (x1.tsv, x2.tsv, y.tsv)");
  std::string gen_kind = "planted", gen_dir;
  Index n1 = 120, n2 = 120, m1 = 8, m2 = 8;
  double density = 0.1;
  PlantedOptions planted;
  gen->add_option("--kind", gen_kind, "planted or synthetic")
      ->capture_default_str()
      ->check(CLI::IsMember({"planted", "synthetic"}));
  gen->add_option("--n1", n1, "Row instances")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--n2", n2, "Column instances")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--m1", m1, "Row features (synthetic)")->capture_default_str();
  gen->add_option("--m2", m2, "Column features (synthetic)")->capture_default_str();
  gen->add_option("--density", density, "Label density (synthetic)")->capture_default_str();
  gen->add_option("--blocks", planted.blocks, "Blocks per domain (planted)")->capture_default_str();
  gen->add_option("--noise-features", planted.noise_features, "Noise features (planted)")->capture_default_str();
  gen->add_option("--flip", planted.flip, "Label flip probability (planted)")->capture_default_str();
  gen->add_option("--out-dir", gen_dir, "Output directory")->required();
  add_common(gen, true);

  try {
    std::vector<std::string> args = merge_config(std::vector<std::string>(argv + 1, argv + argc));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }
  threads = resolve_threads(std::any_of(thread_flags.begin(), thread_flags.end(), [](auto* o) { return o->count() > 0; }),
                            threads);

  if (fit->parsed()) {
    const auto data = fit_data.load();
    const auto params = fit_forest_flags.params(threads, data.x1.cols(), data.x2.cols(), data.precomputed);
    save_forest(fit_out, fit_forest(data, params, seed));
  } else if (pred->parsed()) {
    const auto forest = load_forest(model_path);
    const Matrix x1 = read_matrix_file(pred_x1), x2 = read_matrix_file(pred_x2);
    std::ostringstream text;
    if (x1.rows() > 0 && x2.rows() > 0) {
      write_matrix(text, predict_forest(forest, x1, x2, first_k, threads));
    } else if (first_k && *first_k > forest.n_trees()) {
      throw ContractError("first_k exceeds the number of trees");
    }
    emit(pred_out, text.str());
  } else if (cv->parsed()) {
    const auto data = cv_data.load();
    const auto params = cv_forest.params(threads, data.x1.cols(), data.x2.cols(), data.precomputed);
    const auto report = run_cv(data, params, cv_flags.options(seed));
    emit(cv_out.tsv, report_tsv(report));
    emit_json(cv_out.json, report_json(report, cv_flags.pmp));
  } else if (sweep_leaf->parsed()) {
    const auto data = sl_data.load();
    const auto params = sl_forest.params(threads, data.x1.cols(), data.x2.cols(), data.precomputed);
    std::vector<LeafKind> variants;
    for (const auto& v : sl_variants) variants.push_back(v == "mean" ? LeafKind::Mean : LeafKind::RlsKron);
    std::vector<Setting> settings;
    for (const auto& s : sl_settings) settings.push_back(parse_setting(s));
    const auto rows = leaf_size_sweep(data, sl_dims, variants, params, sl_cv.options(seed), settings);
    std::ostringstream tsv;
    Json arr = Json::array();
    tsv << "variant\tmin_dim\tsetting\tmetric\tscore\trelative\n";
    for (const auto& r : rows) {
      tsv << leaf_name(r.variant) << '\t' << r.min_dim << '\t' << to_string(r.setting) << '\t' << to_string(r.metric)
          << '\t' << optional_tsv(r.score) << '\t' << optional_tsv(r.relative) << '\n';
      arr.push_back({{"variant", leaf_name(r.variant)},
                     {"min_dim", r.min_dim},
                     {"setting", to_string(r.setting)},
                     {"metric", to_string(r.metric)},
                     {"score", optional_json(r.score)},
                     {"relative", optional_json(r.relative)}});
    }
    emit(sl_out.tsv, tsv.str());
    emit_json(sl_out.json, Json{{"pmp", sl_cv.pmp.front()}, {"rows", std::move(arr)}});
  } else if (sweep_trees->parsed()) {
    const auto data = st_data.load();
    const auto params = st_forest.params(threads, data.x1.cols(), data.x2.cols(), data.precomputed);
    const auto rows =
        tree_count_experiment(data, params, st_cv.options(seed), parse_metric(st_metric), st_target, st_repeats);
    std::ostringstream tsv;
    Json arr = Json::array();
    double total = 0.0;
    Index defined = 0;
    tsv << "fold\texpected_trees\tfinal_score\n";
    for (const auto& r : rows) {
      tsv << r.fold << '\t' << optional_tsv(r.expected_trees) << '\t' << optional_tsv(r.final_score) << '\n';
      arr.push_back({{"fold", r.fold},
                     {"expected_trees", optional_json(r.expected_trees)},
                     {"final_score", optional_json(r.final_score)}});
      if (r.expected_trees) {
        total += *r.expected_trees;
        ++defined;
      }
    }
    std::optional<double> mean;
    if (defined) mean = total / static_cast<double>(defined);
    tsv << "mean\t" << optional_tsv(mean) << "\tNA\n";
    emit(st_out.tsv, tsv.str());
    emit_json(st_out.json, Json{{"n_trees", params.n_trees},
                                {"target", st_target},
                                {"repeats", st_repeats},
                                {"metric", st_metric},
                                {"folds", std::move(arr)},
                                {"mean_expected_trees", optional_json(mean)}});
  } else if (bench->parsed()) {
    BenchResult result;
    if (bench_kind == "build") {
      if (bench_sizes.empty()) bench_sizes = {64, 128, 256, 512};
      BuildBenchOptions opt;
      opt.repeats = bench_repeats;
      opt.seed = seed;
      opt.min_leaf = bench_min_leaf;
      opt.include_naive = !bench_no_naive;
      opt.include_deep = !bench_no_deep;
      result = bench_build(bench_sizes, opt);
    } else {
      if (bench_sizes.empty()) bench_sizes = {256, 512, 1024, 2048};
      InferenceBenchOptions opt;
      opt.repeats = bench_repeats;
      opt.seed = seed;
      opt.n_test = bench_n_test;
      opt.features = bench_features;
      opt.min_leaf = bench_min_leaf;
      result = bench_inference(bench_sizes, opt);
    }
    std::ostringstream tsv;
    Json series = Json::array();
    tsv << "method\tn\tseconds\n";
    for (const auto& s : result.series) {
      for (Index k = 0; k < s.sizes.size(); ++k) tsv << s.method << '\t' << s.sizes[k] << '\t' << format_number(s.seconds[k]) << '\n';
      Json js{{"method", s.method}, {"sizes", s.sizes}, {"seconds", s.seconds}};
      if (s.slope) js["slope"] = {{"value", s.slope->slope}, {"stderr", s.slope->stddev}, {"points", s.slope->points}};
      series.push_back(std::move(js));
    }
    emit(bench_out.tsv, tsv.str());
    emit_json(bench_out.json, Json{{"kind", bench_kind}, {"repeats", bench_repeats}, {"series", std::move(series)}});
  } else if (gen->parsed()) {
    const auto data = gen_kind == "planted" ? gen_planted(n1, n2, seed, planted) : gen_synthetic(n1, n2, m1, m2, density, seed);
    std::error_code ec;
    std::filesystem::create_directories(gen_dir, ec);
    if (ec) throw IoError("cannot create '" + gen_dir + "': " + ec.message());
    const std::filesystem::path dir(gen_dir);
    write_matrix_file((dir / "x1.tsv").string(), data.x1);
    write_matrix_file((dir / "x2.tsv").string(), data.x2);
    write_matrix_file((dir / "y.tsv").string(), data.y);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const oxytrees::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
