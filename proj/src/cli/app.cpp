#include "kgc/cli/app.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "kgc/embed/similarity.hpp"
#include "kgc/error.hpp"
#include "kgc/eval/diagnostics.hpp"
#include "kgc/kg/io.hpp"
#include "kgc/kg/ops.hpp"
#include "kgc/numerics/checkpoint.hpp"
#include "kgc/train/trainer.hpp"

namespace kgc::cli {

namespace fs = std::filesystem;

namespace {

/// Train-config flags. Each mirrors a JSON field; only flags actually given
/// override the file.
struct TrainFlags {
  TrainConfig values;
  std::string mask_mode;
  std::vector<std::pair<CLI::Option*, std::function<void(TrainConfig&)>>> bound;

  template <class T>
  void bind(CLI::App* app, const std::string& flag, T TrainConfig::*field,
            const std::string& help) {
    CLI::Option* o = app->add_option(flag, values.*field, help);
    bound.emplace_back(o, [this, field](TrainConfig& c) { c.*field = values.*field; });
  }

  void attach(CLI::App* app) {
    bind(app, "--variant", &TrainConfig::variant, "model variant");
    bind(app, "--epochs", &TrainConfig::epochs, "training epochs");
    bind(app, "--lr", &TrainConfig::lr, "Adam learning rate");
    bind(app, "--l2", &TrainConfig::l2, "L2 weight on projection and kernel weights");
    bind(app, "--label-smoothing", &TrainConfig::label_smoothing, "label smoothing epsilon");
    bind(app, "--grad-clip", &TrainConfig::grad_clip, "global gradient norm cap");
    bind(app, "--dropout", &TrainConfig::dropout, "decoder dropout rate");
    bind(app, "--batch-size", &TrainConfig::batch_size, "training minibatch size");
    bind(app, "--eval-batch-size", &TrainConfig::eval_batch_size, "evaluation batch size");
    bind(app, "--subgraph-budget", &TrainConfig::subgraph_budget, "edges sampled per epoch");
    bind(app, "--eval-every", &TrainConfig::eval_every, "epochs between evaluations");
    bind(app, "--select-split", &TrainConfig::select_split, "split used for model selection");
    bind(app, "--mask-horizon", &TrainConfig::mask_horizon, "epochs until text is fully visible");
    bind(app, "--dim", &TrainConfig::dim, "graph embedding dimension");
    bind(app, "--gcn-layers", &TrainConfig::gcn_layers, "GCN layers");
    bind(app, "--channels", &TrainConfig::channels, "ConvTransE channels");
    bind(app, "--kernel", &TrainConfig::kernel, "ConvTransE kernel width (odd)");
    bind(app, "--decoder-activation", &TrainConfig::decoder_activation, "relu or none");
    bind(app, "--seed", &TrainConfig::seed, "seed for every random choice");
    CLI::Option* o = app->add_option("--mask-mode", mask_mode, "reveal or hide");
    bound.emplace_back(o, [this](TrainConfig& c) {
      if (mask_mode == "reveal") c.mask_mode = MaskMode::Reveal;
      else if (mask_mode == "hide") c.mask_mode = MaskMode::Hide;
      else throw ConfigError("--mask-mode must be reveal or hide");
    });
  }

  void apply(TrainConfig& c) const {
    for (const auto& [option, set] : bound)
      if (option->count() > 0) set(c);
  }
};

struct PathFlags {
  std::string config, data, embeddings, phrases, sim_pairs, out_dir;
  CLI::Option* out_dir_opt = nullptr;

  void attach(CLI::App* app, bool with_config = true) {
    if (with_config) app->add_option("--config", config, "JSON run config");
    app->add_option("--data", data, "dataset directory (train.txt, dev.txt, test.txt)");
    app->add_option("--embeddings", embeddings, "node embedding file");
    app->add_option("--phrases", phrases, "phrase sidecar of the embedding file");
    app->add_option("--sim-pairs", sim_pairs, "sim pair TSV from `kgc densify`");
    out_dir_opt = app->add_option("--out-dir", out_dir, "output directory");
  }

  void apply(RunConfig& c) const {
    if (!data.empty()) c.data = data;
    if (!embeddings.empty()) c.embeddings = embeddings;
    if (!phrases.empty()) c.phrases = phrases;
    if (!sim_pairs.empty()) c.sim_pairs = sim_pairs;
    if (!out_dir.empty()) c.out_dir = out_dir;
  }
};

void require_file(const fs::path& p, const std::string& what) {
  if (p.empty()) throw ConfigError(what + " is required");
  if (!fs::exists(p)) throw ConfigError(what + " not found: " + p.string());
}

void require_dataset(const fs::path& dir) {
  if (dir.empty()) throw ConfigError("--data is required");
  if (!fs::is_directory(dir)) throw ConfigError("data directory not found: " + dir.string());
  require_file(dir / "train.txt", "train.txt");
}

/// Checks every input the run will touch before any work starts.
void validate_run(const RunConfig& c) {
  c.train.validate();
  const Variant v = parse_variant(c.train.variant);
  require_dataset(c.data);
  if (v.text) {
    require_file(c.embeddings, "embedding file (--embeddings)");
    require_file(c.phrases.empty() ? default_phrase_sidecar(c.embeddings) : c.phrases,
                 "phrase sidecar");
  }
  if (v.sim) require_file(c.sim_pairs, "sim pair file (--sim-pairs)");
}

struct Loaded {
  KnowledgeGraph graph;
  std::optional<NodeEmbeddingTable> text;
};

Loaded load_inputs(const RunConfig& c) {
  const Variant v = parse_variant(c.train.variant);
  Loaded in;
  in.graph = load_dataset(c.data);
  if (v.sim) in.graph = densify(in.graph, read_sim_pairs(c.sim_pairs, in.graph));
  if (v.text) {
    const fs::path phrases = c.phrases.empty() ? default_phrase_sidecar(c.embeddings) : c.phrases;
    in.text = load_embeddings(c.embeddings, phrases, in.graph);
  }
  return in;
}

RunConfig resolve(const PathFlags& paths, const TrainFlags& flags) {
  RunConfig c = paths.config.empty() ? RunConfig{} : read_run_config(paths.config);
  paths.apply(c);
  flags.apply(c.train);
  return c;
}

void log_config(std::ostream& err, const RunConfig& c) {
  err << "resolved config:\n" << nlohmann::json(c).dump(2) << '\n';
}

std::string percent_row(const std::string& label, const Metrics& m) {
  return fmt::format("{:<28} {:>7.2f} {:>7.2f} {:>7.2f} {:>7.2f}", label, 100.0 * m.mrr,
                     100.0 * m.hits1, 100.0 * m.hits3, 100.0 * m.hits10);
}

std::string percent_header() {
  return fmt::format("{:<28} {:>7} {:>7} {:>7} {:>7}", "model", "MRR", "HITS@1", "HITS@3",
                     "HITS@10");
}

/// Run config of a checkpoint: --config, else the "<checkpoint>.json" sidecar.
RunConfig checkpoint_config(const std::string& checkpoint, const PathFlags& paths,
                            const TrainFlags& flags) {
  require_file(checkpoint, "checkpoint");
  PathFlags p = paths;
  if (p.config.empty()) p.config = checkpoint + ".json";
  require_file(p.config, "checkpoint config");
  return resolve(p, flags);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

// -- subcommands -------------------------------------------------------------

int cmd_stats(const std::string& data, const std::string& tuples, bool train_only,
              std::ostream& out) {
  KnowledgeGraph g;
  std::string label;
  if (!tuples.empty()) {
    require_file(tuples, "tuple file");
    g = load_tuples(tuples);
    label = fs::path(tuples).filename().string();
  } else {
    require_dataset(data);
    g = train_only ? load_tuples(fs::path(data) / "train.txt") : load_dataset(data);
    label = fs::path(data).lexically_normal().filename().string();
    if (label.empty()) label = fs::path(data).lexically_normal().parent_path().filename().string();
  }
  const GraphStats s = compute_stats(g);
  out << fmt::format("{:<16} {:>10} {:>10} {:>6} {:>10} {:>10}\n", "dataset", "nodes", "edges",
                     "rels", "density", "in-degree");
  out << fmt::format("{:<16} {:>10} {:>10} {:>6} {:>10.1e} {:>10.2f}\n", label, s.nodes, s.edges,
                     s.relations, s.density, s.average_in_degree);
  return kExitOk;
}

int cmd_split(const std::string& input, const std::string& ratios, std::uint64_t seed,
              const fs::path& out_dir, std::ostream& out) {
  require_file(input, "tuple file");
  const auto r = parse_list(ratios);
  if (r.size() != 3) throw ConfigError("--ratios needs three values (train,dev,test)");
  const KnowledgeGraph g = load_tuples(input);
  const KnowledgeGraph s = apply_split(g, make_random_split(g, {r[0], r[1], r[2]}, seed));
  fs::create_directories(out_dir);
  for (Split sp : kAllSplits) {
    write_tsv(out_dir / (std::string(split_name(sp)) + ".txt"), s, sp);
    out << fmt::format("{} {}\n", split_name(sp), s.edges(sp).size());
  }
  return kExitOk;
}

struct DensifyArgs {
  std::string data, embeddings, phrases;
  std::optional<double> tau;
  std::optional<std::uint64_t> cap;
  std::optional<double> tail;
  std::size_t samples = kDefaultTailSamples;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
};

int cmd_densify(const DensifyArgs& a, std::ostream& out, std::ostream& err) {
  require_dataset(a.data);
  require_file(a.embeddings, "embedding file (--embeddings)");
  const fs::path phrases = a.phrases.empty() ? default_phrase_sidecar(a.embeddings) : fs::path(a.phrases);
  require_file(phrases, "phrase sidecar");
  const int modes = a.tau.has_value() + a.cap.has_value() + a.tail.has_value();
  if (modes != 1) throw ConfigError("give exactly one of --tau, --cap, --tail");

  const KnowledgeGraph g = load_dataset(a.data);
  const NodeEmbeddingTable table = load_embeddings(a.embeddings, phrases, g);
  double tau = 0.0;
  std::string criterion;
  if (a.tau) {
    tau = *a.tau;
    criterion = "tau";
  } else if (a.cap) {
    const CapChoice c = select_threshold_cap(table, *a.cap);
    if (c.cap_exceeded)
      err << fmt::format("warning: even tau = 1.00 yields {} pairs, above the cap {}\n", c.pairs,
                         *a.cap);
    tau = c.tau;
    criterion = "cap";
  } else {
    const TailChoice t = select_threshold_tail(table, a.samples, a.seed, *a.tail);
    err << fmt::format("similarity sample: n={} mean={:.6f} std={:.6f}\n", t.samples, t.mean,
                       t.stddev);
    tau = t.tau;
    criterion = "tail";
  }
  SimEdgeSet set = pairwise_topk_by_threshold(table, tau);
  set.criterion = criterion;
  if (set.zero_norm_rows > 0)
    err << fmt::format("warning: {} zero-norm rows take part in no pair\n", set.zero_norm_rows);
  fs::create_directories(a.out_dir);
  write_sim_pairs(fs::path(a.out_dir) / "sim_pairs.tsv", g, set);
  out << fmt::format("criterion={} tau={:.6f} pairs={}\n", criterion, tau, set.pairs.size());
  return kExitOk;
}

int cmd_train(const PathFlags& paths, const TrainFlags& flags, std::ostream& out,
              std::ostream& err) {
  const RunConfig c = resolve(paths, flags);
  validate_run(c);
  log_config(err, c);
  Loaded in = load_inputs(c);
  fs::create_directories(c.out_dir);

  KgcModel model(c.train, in.graph, in.text);
  Trainer trainer(model, in.graph, c.train);
  const TrainResult r = trainer.run([&](const EpochLog& log) {
    std::string line = fmt::format("epoch {} loss {:.6f} batches {}", log.epoch, log.mean_loss,
                                   log.batches);
    if (log.eval)
      line += fmt::format(" {} mrr {:.4f}", split_name(log.eval->split), log.eval->metrics.mrr);
    err << line << '\n';
  });

  const fs::path ckpt = c.out_dir / "model.kgc";
  save_checkpoint(ckpt, model.params(), &trainer.optimizer());
  write_run_config(fs::path(ckpt.string() + ".json"), c);
  write_history_csv(c.out_dir / "history.csv", r.history);
  out << fmt::format("best_epoch={} best_mrr={:.6f} checkpoint={}\n", r.best_epoch, r.best_mrr,
                     ckpt.string());
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& split, const PathFlags& paths,
             const TrainFlags& flags, std::ostream& out, std::ostream& err) {
  const RunConfig c = checkpoint_config(checkpoint, paths, flags);
  validate_run(c);
  const Split sp = parse_split(split);
  Loaded in = load_inputs(c);
  KgcModel model(c.train, in.graph, in.text);
  load_checkpoint(checkpoint, model.params());
  const RankingReport r = evaluate(ModelScorer(model, in.graph), in.graph, sp,
                                   FilterIndex::build(in.graph), c.train.eval_batch_size);
  err << fmt::format("{} queries per direction\n", r.tail.queries);
  out << percent_header() << '\n' << percent_row(c.train.variant, r.average) << '\n';
  if (paths.out_dir_opt->count() > 0) {
    fs::create_directories(c.out_dir);
    std::ofstream csv(c.out_dir / fmt::format("eval_{}.csv", split_name(sp)));
    csv << "direction,mrr,hits1,hits3,hits10\n";
    for (const auto& [name, m] : {std::pair{"tail", r.tail}, {"head", r.head}, {"mean", r.average}})
      csv << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", name, m.mrr, m.hits1, m.hits3,
                         m.hits10);
  }
  return kExitOk;
}

int cmd_perm(const std::string& checkpoint, const std::string& split, const PathFlags& paths,
             const TrainFlags& flags, std::ostream& out) {
  const RunConfig c = checkpoint_config(checkpoint, paths, flags);
  validate_run(c);
  const Split sp = parse_split(split);
  Loaded in = load_inputs(c);
  KgcModel model(c.train, in.graph, in.text);
  load_checkpoint(checkpoint, model.params());
  const PermutationResult r =
      permutation_test(model, in.graph, sp, c.train.seed, c.train.eval_batch_size);
  fs::create_directories(c.out_dir);
  std::ofstream csv(c.out_dir / "permutation.csv");
  csv << "split,base_mrr,shuffled_mrr,delta_mrr\n";
  csv << fmt::format("{},{:.6f},{:.6f},{:.6f}\n", split_name(sp), r.base.mrr, r.shuffled.mrr,
                     r.delta_mrr);
  out << fmt::format("base_mrr={:.4f} shuffled_mrr={:.4f} delta_mrr={:+.4f}\n", r.base.mrr,
                     r.shuffled.mrr, r.delta_mrr);
  return kExitOk;
}

int cmd_ablate(const std::string& densities, const PathFlags& paths, const TrainFlags& flags,
               std::ostream& out, std::ostream& err) {
  const RunConfig c = resolve(paths, flags);
  validate_run(c);
  const auto levels = parse_list(densities);
  log_config(err, c);
  Loaded in = load_inputs(c);
  fs::create_directories(c.out_dir);
  const auto rows = density_ablation(in.graph, levels, c.train, in.text, [&](const AblationRow& r) {
    err << fmt::format("density {:.3e} edges {} mrr {:.4f}\n", r.density, r.train_edges,
                       r.metrics.mrr);
  });
  write_ablation_csv(c.out_dir / "ablation.csv", rows);
  out << fmt::format("{} levels written to {}\n", rows.size(),
                     (c.out_dir / "ablation.csv").string());
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge-base completion for sparse commonsense graphs", "kgc"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  auto* stats = app.add_subcommand("stats", "graph statistics of a dataset");
  std::string stats_data, stats_tuples;
  bool train_only = false;
  stats->add_option("--data", stats_data, "dataset directory");
  stats->add_option("--tuples", stats_tuples, "single TSV file instead of a directory");
  stats->add_flag("--train-only", train_only, "count the training file's vocabulary only");

  auto* split = app.add_subcommand("split", "random train/dev/test split of a tuple file");
  std::string split_input, split_ratios = "0.8,0.1,0.1", split_out = "out";
  std::uint64_t split_seed = 0;
  split->add_option("--input", split_input, "tuple TSV")->required();
  split->add_option("--ratios", split_ratios, "train,dev,test fractions");
  split->add_option("--seed", split_seed, "split seed");
  split->add_option("--out-dir", split_out, "output directory");

  auto* dens = app.add_subcommand("densify", "similarity pairs from node embeddings");
  DensifyArgs da;
  double tau = 0.0, tail = 0.0;
  std::uint64_t cap = 0;
  dens->add_option("--data", da.data, "dataset directory")->required();
  dens->add_option("--embeddings", da.embeddings, "node embedding file")->required();
  dens->add_option("--phrases", da.phrases, "phrase sidecar");
  auto* tau_opt = dens->add_option("--tau", tau, "fixed cosine threshold");
  auto* cap_opt = dens->add_option("--cap", cap, "largest number of new pairs");
  auto* tail_opt = dens->add_option("--tail", tail, "threshold at mean + k std");
  dens->add_option("--samples", da.samples, "pairs sampled for --tail");
  dens->add_option("--seed", da.seed, "sampling seed");
  dens->add_option("--out-dir", da.out_dir, "output directory");

  PathFlags train_paths, eval_paths, perm_paths, ablate_paths;
  TrainFlags train_flags, eval_flags, perm_flags, ablate_flags;

  auto* train = app.add_subcommand("train", "train a model");
  train_paths.attach(train);
  train_flags.attach(train);

  auto* ev = app.add_subcommand("eval", "rank a split with a trained checkpoint");
  std::string ev_ckpt, ev_split = "test";
  ev->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
  ev->add_option("--split", ev_split, "dev or test");
  eval_paths.attach(ev);
  eval_flags.attach(ev);

  auto* perm = app.add_subcommand("perm-test", "shuffle graph embeddings within batches");
  std::string perm_ckpt, perm_split = "test";
  perm->add_option("--checkpoint", perm_ckpt, "checkpoint file")->required();
  perm->add_option("--split", perm_split, "dev or test");
  perm_paths.attach(perm);
  perm_flags.attach(perm);

  auto* ablate = app.add_subcommand("ablate-density", "retrain at decreasing graph densities");
  std::string densities;
  ablate->add_option("--densities", densities, "comma-separated, descending")->required();
  ablate_paths.attach(ablate);
  ablate_flags.attach(ablate);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*stats) return cmd_stats(stats_data, stats_tuples, train_only, out);
    if (*split) return cmd_split(split_input, split_ratios, split_seed, split_out, out);
    if (*dens) {
      if (tau_opt->count()) da.tau = tau;
      if (cap_opt->count()) da.cap = cap;
      if (tail_opt->count()) da.tail = tail;
      return cmd_densify(da, out, err);
    }
    if (*train) return cmd_train(train_paths, train_flags, out, err);
    if (*ev) return cmd_eval(ev_ckpt, ev_split, eval_paths, eval_flags, out, err);
    if (*perm) return cmd_perm(perm_ckpt, perm_split, perm_paths, perm_flags, out);
    if (*ablate) return cmd_ablate(densities, ablate_paths, ablate_flags, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace kgc::cli
