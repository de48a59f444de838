#include "kgc/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "kgc/error.hpp"
#include "kgc/numerics/ops.hpp"
#include "kgc/train/mask.hpp"

namespace kgc {

namespace {

constexpr std::uint64_t kSamplerStream = 2;
constexpr std::uint64_t kDropoutStream = 3;
constexpr std::uint64_t kMaskStream = 4;
constexpr std::uint64_t kShuffleStream = 5;

struct Prefix {
  std::size_t src;
  std::size_t rel;
  std::vector<std::size_t> targets;
};

std::vector<Prefix> collect_prefixes(const GraphView& view) {
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> grouped;
  for (const auto& e : view.scoreable_edges) grouped[{e.src, e.rel}].push_back(e.dst);
  std::vector<Prefix> out;
  out.reserve(grouped.size());
  for (auto& [key, targets] : grouped) {
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    out.push_back({key.first, key.second, std::move(targets)});
  }
  return out;
}

}  // namespace

Tensor smoothed_bce(const Tensor& probs, std::span<const double> gold, double eps) {
  if (probs.rank() != 2) throw ShapeError("smoothed_bce: expected [batch x candidates] scores");
  if (gold.size() != probs.numel())
    throw ShapeError("smoothed_bce: " + std::to_string(gold.size()) + " targets for " +
                     to_string(probs.shape()) + " scores");
  if (eps < 0.0 || eps >= 1.0) throw ConfigError("label smoothing must be in [0, 1)");
  const double spread = eps / static_cast<double>(probs.dim(1));
  std::vector<double> y(gold.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = (1.0 - eps) * gold[i] + spread;
  return binary_cross_entropy(probs, Tensor::from_values(probs.shape(), std::move(y)));
}

Tensor l2_penalty(const ParameterSet& params, double lambda) {
  Tensor total = Tensor::zeros({});
  for (const auto& p : params.items())
    if (p.regularized) total = add(total, sum_squares(p.tensor));
  return scale(total, lambda);
}

Tensor training_loss(const Tensor& probs, std::span<const double> gold, double eps,
                     const ParameterSet& params, double lambda) {
  const Tensor bce = smoothed_bce(probs, gold, eps);
  if (lambda == 0.0) return bce;
  return add(bce, l2_penalty(params, lambda));
}

Trainer::Trainer(KgcModel& model, const KnowledgeGraph& graph, TrainConfig config)
    : model_(&model), graph_(&graph), config_(std::move(config)), adam_(AdamOptions{config_.lr}) {
  config_.validate();
}

TrainResult Trainer::run(const std::function<void(const EpochLog&)>& on_epoch) {
  KgcModel& model = *model_;
  const KnowledgeGraph& graph = *graph_;
  ParameterSet& params = model.params();
  const Variant& variant = model.variant();
  const MaskSchedule schedule{config_.mask_horizon, config_.mask_mode};
  const Split select = parse_split(config_.select_split);

  Rng sampler = make_rng(config_.seed, kSamplerStream);
  Rng drop = make_rng(config_.seed, kDropoutStream);
  Rng masker = make_rng(config_.seed, kMaskStream);
  Rng shuffler = make_rng(config_.seed, kShuffleStream);

  const FilterIndex filter = FilterIndex::build(graph);
  const bool can_select = !graph.edges(select).empty();

  TrainResult result;
  ParameterSet best_params;
  Adam best_adam = adam_;
  bool have_best = false;

  for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
    const GraphView view =
        sample_subgraph(graph, config_.subgraph_budget, variant.sim, sampler());
    std::vector<Prefix> prefixes = collect_prefixes(view);
    std::shuffle(prefixes.begin(), prefixes.end(), shuffler);

    const std::size_t n = view.num_nodes();
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < prefixes.size(); begin += config_.batch_size) {
      const std::size_t end = std::min(prefixes.size(), begin + config_.batch_size);
      const std::size_t b = end - begin;
      std::vector<std::size_t> src(b), rel(b);
      std::vector<double> gold(b * n, 0.0);
      for (std::size_t i = 0; i < b; ++i) {
        const Prefix& p = prefixes[begin + i];
        src[i] = p.src;
        rel[i] = p.rel;
        for (auto t : p.targets) gold[i * n + t] = 1.0;
      }

      std::vector<double> mask;
      if (variant.concat()) mask = draw_mask(schedule, epoch, model.text_dim(), masker);
      const NodeReprs reprs = model.represent(view, variant.concat() ? &mask : nullptr);
      const Tensor logits =
          model.decoder().logits(model.heads(reprs, src), rel, reprs.full, true, drop);
      const Tensor loss =
          training_loss(sigmoid(logits), gold, config_.label_smoothing, params, config_.l2);
      const double value = loss.item();
      if (!std::isfinite(value))
        throw NumericError(
            fmt::format("non-finite loss at epoch {} batch {}", epoch + 1, batches + 1));

      params.zero_grad();
      loss.backward();
      clip_grad_norm(params, config_.grad_clip);
      adam_.step(params);
      loss_sum += value;
      ++batches;
    }
    const double mean_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
    result.epoch_loss.push_back(mean_loss);

    EpochLog log{epoch + 1, mean_loss, batches, nullptr};
    const bool due = (epoch + 1) % config_.eval_every == 0 || epoch + 1 == config_.epochs;
    if (due && can_select) {
      const ModelScorer scorer(model, graph);
      const RankingReport report =
          evaluate(scorer, graph, select, filter, config_.eval_batch_size);
      result.history.push_back({epoch + 1, select, report.average});
      log.eval = &result.history.back();
      if (!have_best || report.average.mrr > result.best_mrr) {
        have_best = true;
        result.best_epoch = epoch + 1;
        result.best_mrr = report.average.mrr;
        best_params = params.snapshot();
        best_adam = adam_;
      }
    }
    if (on_epoch) on_epoch(log);
  }

  if (have_best) {
    params.assign(best_params);
    adam_ = best_adam;
  }
  if (select != Split::Test && !graph.edges(Split::Test).empty()) {
    const ModelScorer scorer(model, graph);
    const RankingReport report =
        evaluate(scorer, graph, Split::Test, filter, config_.eval_batch_size);
    result.history.push_back({result.best_epoch ? result.best_epoch : config_.epochs, Split::Test,
                              report.average});
  }
  return result;
}

void write_history_csv(std::ostream& out, std::span<const EvalRecord> history) {
  out << "epoch,split,mrr,hits1,hits3,hits10\n";
  for (const auto& r : history) {
    out << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.epoch, split_name(r.split),
                       r.metrics.mrr, r.metrics.hits1, r.metrics.hits3, r.metrics.hits10);
  }
}

void write_history_csv(const std::filesystem::path& path, std::span<const EvalRecord> history) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_history_csv(out, history);
}

}  // namespace kgc
