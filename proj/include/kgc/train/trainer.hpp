#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "kgc/eval/ranking.hpp"
#include "kgc/numerics/optim.hpp"
#include "kgc/train/model.hpp"

namespace kgc {

/// Mean binary cross-entropy of probabilities against multi-hot targets
/// smoothed to (1 - eps) y + eps / candidates, where candidates is the
/// width of `probs`.
Tensor smoothed_bce(const Tensor& probs, std::span<const double> gold, double eps);

/// lambda times the summed squares of every regularized parameter.
Tensor l2_penalty(const ParameterSet& params, double lambda);

/// Smoothed BCE plus the L2 penalty.
Tensor training_loss(const Tensor& probs, std::span<const double> gold, double eps,
                     const ParameterSet& params, double lambda);

struct EvalRecord {
  std::size_t epoch = 0;
  Split split = Split::Dev;
  Metrics metrics;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based count of completed epochs
  double mean_loss = 0.0;
  std::size_t batches = 0;
  const EvalRecord* eval = nullptr;
};

struct TrainResult {
  std::vector<EvalRecord> history;
  std::vector<double> epoch_loss;
  /// 0 when no evaluation ran; the final parameters are then kept.
  std::size_t best_epoch = 0;
  double best_mrr = 0.0;
};

/// Runs the training loop and leaves the model at its best checkpoint.
///
/// Each epoch samples a subgraph view, walks its distinct (e1, rel) prefixes
/// in shuffled minibatches, scores every node of the view, and takes one
/// clipped Adam step per minibatch. Every `eval_every` epochs (and after the
/// last) the model is ranked on `select_split`; the parameters with the best
/// MRR are kept. When test tuples exist and selection is not on test, a final
/// test row is appended under the best epoch.
class Trainer {
 public:
  Trainer(KgcModel& model, const KnowledgeGraph& graph, TrainConfig config);

  TrainResult run(const std::function<void(const EpochLog&)>& on_epoch = {});
  const Adam& optimizer() const { return adam_; }
  Adam& optimizer() { return adam_; }

 private:
  KgcModel* model_;
  const KnowledgeGraph* graph_;
  TrainConfig config_;
  Adam adam_;
};

/// `epoch,split,mrr,hits1,hits3,hits10` with six decimals.
void write_history_csv(std::ostream& out, std::span<const EvalRecord> history);
void write_history_csv(const std::filesystem::path& path, std::span<const EvalRecord> history);

}  // namespace kgc
