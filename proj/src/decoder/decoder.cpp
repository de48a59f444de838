#include "kgc/decoder/decoder.hpp"

#include "kgc/encoder/gcn.hpp"
#include "kgc/error.hpp"
#include "kgc/numerics/ops.hpp"

namespace kgc {

namespace {

void check_operands(std::string_view who, std::size_t dim, const Tensor& heads,
                    std::span<const std::size_t> relations, const Tensor& candidates) {
  if (heads.rank() != 2 || heads.dim(1) != dim)
    throw ShapeError(std::string(who) + ": head representations are " + to_string(heads.shape()) +
                     ", expected width " + std::to_string(dim));
  if (candidates.rank() != 2 || candidates.dim(1) != dim)
    throw ShapeError(std::string(who) + ": candidate representations are " +
                     to_string(candidates.shape()) + ", expected width " + std::to_string(dim));
  if (relations.size() != heads.dim(0))
    throw ShapeError(std::string(who) + ": " + std::to_string(relations.size()) +
                     " relations for " + std::to_string(heads.dim(0)) + " heads");
}

Tensor relation_table(std::size_t rows, std::size_t dim, Rng& rng) {
  return Tensor::parameter({rows, dim}, embedding_uniform(rows, dim, rng), true);
}

}  // namespace

ConvTransE::ConvTransE(ConvTransEOptions options, std::size_t dim, std::size_t num_relations,
                       ParameterSet& params, Rng& init_rng)
    : options_(options), dim_(dim), params_(&params) {
  if (dim == 0) throw ConfigError("convtranse: dimension must be positive");
  if (options.channels == 0) throw ConfigError("convtranse: channel count must be positive");
  if (options.kernel % 2 == 0)
    throw ConfigError("convtranse: kernel width must be odd, got " + std::to_string(options.kernel));
  const std::size_t c = options.channels;
  const std::size_t k = options.kernel;
  params.add("decoder/rel_emb", relation_table(num_relations, dim, init_rng), false);
  params.add("decoder/kernels", Tensor::parameter({c, 2, k}, glorot_uniform(2 * k, c, init_rng)),
             true);
  params.add("decoder/W_conv",
             Tensor::parameter({c * dim, dim}, glorot_uniform(c * dim, dim, init_rng)), true);
}

Tensor ConvTransE::logits(const Tensor& heads, std::span<const std::size_t> relations,
                          const Tensor& candidates, bool train, Rng& rng) const {
  check_operands("convtranse", dim_, heads, relations, candidates);
  const Tensor rel = gather_rows(params_->get("decoder/rel_emb"), relations);
  Tensor x = dropout(stack_rows({heads, rel}), options_.input_dropout, train, rng);
  Tensor m = conv1d_two_row(x, params_->get("decoder/kernels"));
  if (options_.relu) m = relu(m);
  m = dropout(m, options_.feature_dropout, train, rng);
  Tensor z = matmul(m, params_->get("decoder/W_conv"));
  if (options_.relu) z = relu(z);
  z = dropout(z, options_.hidden_dropout, train, rng);
  return matmul_nt(z, candidates);
}

DistMult::DistMult(std::size_t dim, std::size_t num_relations, ParameterSet& params, Rng& init_rng)
    : dim_(dim), params_(&params) {
  if (dim == 0) throw ConfigError("distmult: dimension must be positive");
  params.add("decoder/rel_diag", relation_table(num_relations, dim, init_rng), false);
}

Tensor DistMult::logits(const Tensor& heads, std::span<const std::size_t> relations,
                        const Tensor& candidates, bool, Rng&) const {
  check_operands("distmult", dim_, heads, relations, candidates);
  const Tensor w = gather_rows(params_->get("decoder/rel_diag"), relations);
  return matmul_nt(mul(heads, w), candidates);
}

ComplEx::ComplEx(std::size_t dim, std::size_t num_relations, ParameterSet& params, Rng& init_rng)
    : dim_(dim), params_(&params) {
  if (dim == 0 || dim % 2 != 0)
    throw ConfigError("complex: dimension must be even and positive, got " + std::to_string(dim));
  params.add("decoder/rel_complex", relation_table(num_relations, dim, init_rng), false);
}

Tensor ComplEx::logits(const Tensor& heads, std::span<const std::size_t> relations,
                       const Tensor& candidates, bool, Rng&) const {
  check_operands("complex", dim_, heads, relations, candidates);
  const std::size_t h = dim_ / 2;
  const Tensor w = gather_rows(params_->get("decoder/rel_complex"), relations);
  const Tensor ar = slice_cols(heads, 0, h), ai = slice_cols(heads, h, dim_);
  const Tensor wr = slice_cols(w, 0, h), wi = slice_cols(w, h, dim_);
  // (a w) conj(b) has real part p.b_r + q.b_i with p + iq = a w.
  const Tensor p = sub(mul(ar, wr), mul(ai, wi));
  const Tensor q = add(mul(ar, wi), mul(ai, wr));
  return matmul_nt(concat_cols({p, q}), candidates);
}

}  // namespace kgc
