#pragma once

#include <string>
#include <vector>

#include "kgc/encoder/view.hpp"
#include "kgc/numerics/params.hpp"
#include "kgc/rng.hpp"

namespace kgc {

struct GcnOptions {
  std::size_t layers = 2;
  std::size_t dim = 200;
};

/// Glorot-uniform values for a [fan_in x fan_out] array.
std::vector<double> glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// Uniform(-sqrt(3/dim), sqrt(3/dim)) values for a [rows x dim] lookup table,
/// so rows have unit expected squared norm whatever the row count.
std::vector<double> embedding_uniform(std::size_t rows, std::size_t dim, Rng& rng);

/// Relation-weighted, neighbor-attentive graph convolution:
///
///   h_i^{l+1} = tanh( sum_{(j,r) -> i} alpha_r beta_ij^l h_j^l W^l + h_i^l W0^l )
///   beta_i^l  = softmax_j( h_i^l . h_j^l )
///
/// The softmax runs over node i's whole incoming multiset (all relations,
/// parallel edges kept). Edges of a relation whose weight is exactly zero are
/// treated as absent. Parameters live in the shared ParameterSet under
/// "<prefix>/h0", "<prefix>/W<l>", "<prefix>/W0_<l>" and "<prefix>/alpha".
class GcnEncoder {
 public:
  GcnEncoder(GcnOptions options, std::size_t num_nodes, std::size_t num_relations,
             ParameterSet& params, Rng& init_rng, std::string prefix = "gcn");

  /// Graph embeddings H for the view's nodes, [view nodes x dim].
  Tensor encode(const GraphView& view) const;
  /// Initial node embeddings h0 for the view's nodes.
  Tensor initial(const GraphView& view) const;

  const GcnOptions& options() const { return options_; }
  Tensor& alpha() const { return params_->get(prefix_ + "/alpha"); }

 private:
  GcnOptions options_;
  ParameterSet* params_;
  std::string prefix_;
};

/// One convolution layer given explicit operands. `edges` must be sorted by
/// destination; `alpha` is [relations x 1].
Tensor gcn_layer(const Tensor& h, const std::vector<Edge>& edges, const Tensor& weight,
                 const Tensor& self_weight, const Tensor& alpha);

}  // namespace kgc
