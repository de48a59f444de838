#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "kgc/numerics/params.hpp"
#include "kgc/rng.hpp"

namespace kgc {

/// Scores (e1, rel, e2) for every candidate e2 at once.
///
/// `heads` is [B x dim], `relations` holds B directed relation ids and
/// `candidates` is [N x dim]. The result is [B x N] raw scores (logits); the
/// sigmoid is applied by the caller.
class Decoder {
 public:
  virtual ~Decoder() = default;
  virtual Tensor logits(const Tensor& heads, std::span<const std::size_t> relations,
                        const Tensor& candidates, bool train, Rng& rng) const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::string_view name() const = 0;
};

struct ConvTransEOptions {
  std::size_t channels = 500;
  std::size_t kernel = 5;
  double input_dropout = 0.2;
  double feature_dropout = 0.2;
  double hidden_dropout = 0.2;
  /// ReLU on the feature maps and on the projected query. Without it the
  /// score is linear in [e1; e_rel], so the relation cannot interact with e1.
  bool relu = true;
};

/// Stacks e1 and e_rel into a 2 x dim grid, convolves it with C kernels of
/// width K (zero padded so each map keeps length dim), flattens the maps into
/// M and scores M W_conv e2 (with optional ReLUs, see ConvTransEOptions).
///
/// Parameters: "decoder/rel_emb" [relations x dim], "decoder/kernels"
/// [C x 2 x K], "decoder/W_conv" [C*dim x dim]. The last two are L2-regularized.
class ConvTransE final : public Decoder {
 public:
  ConvTransE(ConvTransEOptions options, std::size_t dim, std::size_t num_relations,
             ParameterSet& params, Rng& init_rng);

  Tensor logits(const Tensor& heads, std::span<const std::size_t> relations,
                const Tensor& candidates, bool train, Rng& rng) const override;
  std::size_t dim() const override { return dim_; }
  std::string_view name() const override { return "convtranse"; }
  const ConvTransEOptions& options() const { return options_; }

 private:
  ConvTransEOptions options_;
  std::size_t dim_;
  ParameterSet* params_;
};

/// s = sum_d e1_d w_d e2_d. Parameter: "decoder/rel_diag" [relations x dim].
class DistMult final : public Decoder {
 public:
  DistMult(std::size_t dim, std::size_t num_relations, ParameterSet& params, Rng& init_rng);

  Tensor logits(const Tensor& heads, std::span<const std::size_t> relations,
                const Tensor& candidates, bool train, Rng& rng) const override;
  std::size_t dim() const override { return dim_; }
  std::string_view name() const override { return "distmult"; }

 private:
  std::size_t dim_;
  ParameterSet* params_;
};

/// s = Re(sum_d e1_d w_d conj(e2_d)) with vectors stored as [real; imaginary]
/// halves. Parameter: "decoder/rel_complex" [relations x dim]; dim must be even.
class ComplEx final : public Decoder {
 public:
  ComplEx(std::size_t dim, std::size_t num_relations, ParameterSet& params, Rng& init_rng);

  Tensor logits(const Tensor& heads, std::span<const std::size_t> relations,
                const Tensor& candidates, bool train, Rng& rng) const override;
  std::size_t dim() const override { return dim_; }
  std::string_view name() const override { return "complex"; }

 private:
  std::size_t dim_;
  ParameterSet* params_;
};

}  // namespace kgc
