#include "kgc/encoder/gcn.hpp"

#include <cmath>

#include "kgc/error.hpp"
#include "kgc/numerics/ops.hpp"

namespace kgc {

std::vector<double> glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> v(fan_in * fan_out);
  for (auto& x : v) x = (2.0 * uniform01(rng) - 1.0) * bound;
  return v;
}

std::vector<double> embedding_uniform(std::size_t rows, std::size_t dim, Rng& rng) {
  const double bound = std::sqrt(3.0 / static_cast<double>(dim));
  std::vector<double> v(rows * dim);
  for (auto& x : v) x = (2.0 * uniform01(rng) - 1.0) * bound;
  return v;
}

GcnEncoder::GcnEncoder(GcnOptions options, std::size_t num_nodes, std::size_t num_relations,
                       ParameterSet& params, Rng& init_rng, std::string prefix)
    : options_(options), params_(&params), prefix_(std::move(prefix)) {
  if (options_.layers < 1) throw ConfigError("GCN needs at least one layer");
  if (options_.dim < 1) throw ConfigError("GCN dimension must be positive");
  const std::size_t d = options_.dim;
  params.add(prefix_ + "/h0",
             Tensor::parameter({num_nodes, d}, embedding_uniform(num_nodes, d, init_rng), true),
             false);
  for (std::size_t l = 0; l < options_.layers; ++l) {
    params.add(prefix_ + "/W" + std::to_string(l),
               Tensor::parameter({d, d}, glorot_uniform(d, d, init_rng)), true);
    params.add(prefix_ + "/W0_" + std::to_string(l),
               Tensor::parameter({d, d}, glorot_uniform(d, d, init_rng)), true);
  }
  params.add(prefix_ + "/alpha",
             Tensor::parameter({num_relations, 1}, std::vector<double>(num_relations, 1.0)), false);
}

Tensor GcnEncoder::initial(const GraphView& view) const {
  std::vector<std::size_t> idx(view.nodes.begin(), view.nodes.end());
  return gather_rows(params_->get(prefix_ + "/h0"), idx);
}

Tensor gcn_layer(const Tensor& h, const std::vector<Edge>& edges, const Tensor& weight,
                 const Tensor& self_weight, const Tensor& alpha) {
  const std::size_t n = h.dim(0);
  const auto alpha_values = alpha.values();
  std::vector<std::size_t> src, dst, rel;
  std::vector<std::size_t> offsets(n + 1, 0);
  for (const auto& e : edges) {
    if (e.rel >= alpha_values.size())
      throw ConfigError("edge relation " + std::to_string(e.rel) + " has no weight");
    if (alpha_values[e.rel] == 0.0) continue;
    if (!src.empty() && e.dst < dst.back())
      throw ConfigError("gcn_layer: edges must be sorted by destination");
    src.push_back(e.src);
    dst.push_back(e.dst);
    rel.push_back(e.rel);
    ++offsets[e.dst + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];

  const Tensor self_term = matmul(h, self_weight);
  if (src.empty()) return tanh(self_term);

  const Tensor projected = matmul(h, weight);
  const Tensor logits = row_dot(gather_rows(h, dst), gather_rows(h, src));
  const Tensor beta = segment_softmax(logits, offsets);
  const Tensor edge_alpha = reshape(gather_rows(alpha, rel), {rel.size()});
  const Tensor messages = scale_rows(gather_rows(projected, src), mul(beta, edge_alpha));
  return tanh(add(scatter_add_rows(messages, dst, n), self_term));
}

Tensor GcnEncoder::encode(const GraphView& view) const {
  Tensor h = initial(view);
  const Tensor& alpha = params_->get(prefix_ + "/alpha");
  for (std::size_t l = 0; l < options_.layers; ++l) {
    h = gcn_layer(h, view.message_edges, params_->get(prefix_ + "/W" + std::to_string(l)),
                  params_->get(prefix_ + "/W0_" + std::to_string(l)), alpha);
    for (double v : h.values())
      if (!std::isfinite(v))
        throw NumericError("GCN layer " + std::to_string(l) + " produced a non-finite value");
  }
  return h;
}

}  // namespace kgc
