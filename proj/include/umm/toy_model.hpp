#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "umm/backbone.hpp"

namespace umm {

/// Character-level tokenizer shared by the toy backbone and its trainer.
class ToyTokenizer {
 public:
  static constexpr int kEos = 0;
  static constexpr int kSep = 1;
  static constexpr int kUnk = 2;
  static constexpr int kFirstSymbol = 3;
  static constexpr int kMinVocab = 8;
  static int max_vocab();

  explicit ToyTokenizer(int vocab);

  int vocab() const { return vocab_; }
  std::vector<int> encode(std::string_view text) const;
  std::string decode(std::span<const int> tokens) const;
  /// Single token standing in for an image: a symbol chosen by content hash.
  int image_token(const Image& image) const;

 private:
  int vocab_;
  std::string symbols_;
};

/// Tiny embedding -> shared residual mixing stack -> tied output head.
///
/// Hidden state of block l at position t:
///   h_l[t] = h_{l-1}[t] + tanh(W * mean_{s<=t} h_{l-1}[s]),   h_0 = E[token]
/// and logits[t] = E * h_L[t]. Parameters are E (vocab x hidden) and W
/// (hidden x hidden), so the count is vocab*hidden + hidden^2 regardless of depth.
class ToyTrainable final : public BackboneAdapter, public TrainableBackbone {
 public:
  static const AdapterDescriptor& static_descriptor();

  const AdapterDescriptor& descriptor() const override { return static_descriptor(); }
  int num_layers() const override { return layers_; }
  HiddenTrace trace(const InferenceRequest& req, std::string_view response) override;
  std::string preprocessing_fingerprint() const override;

  double loss(std::span<const TrainExample> batch) const override;
  double train_step(std::span<const TrainExample> batch, double learning_rate) override;
  void save_checkpoint(const fs::path& file, const json& meta) const override;
  json restore_checkpoint(const fs::path& file) override;
  std::size_t parameter_count() const override { return params_.size(); }
  std::string parameter_digest() const override;

  int hidden_dim() const { return hidden_; }
  int vocab() const { return vocab_; }
  const std::vector<double>& parameters() const { return params_; }
  void set_parameters(std::vector<double> params);

  /// Mean token cross-entropy over target tokens and its gradient w.r.t. the
  /// flat parameter vector (embedding first, then mixing matrix, row-major).
  double loss_and_gradient(std::span<const TrainExample> batch, std::vector<double>* grad) const;

  /// Token sequence fed to the model for a prompt (with images) and its response.
  std::vector<int> build_sequence(const std::vector<Image>& images, std::string_view prompt,
                                  std::string_view response, bool with_eos,
                                  std::size_t* prompt_length) const;

 protected:
  void do_load(const ParamMap& cfg) override;
  std::vector<InferenceResult> do_generate(std::span<const InferenceRequest> batch,
                                           const ParamMap& gen_cfg) override;

 private:
  struct Forward {
    // hidden[l][t] for l = 0..layers (0 is the embedding output)
    std::vector<std::vector<std::vector<double>>> hidden;
    // pooled[l][t] and activation tanh(W pooled) for block l+1
    std::vector<std::vector<std::vector<double>>> pooled;
    std::vector<std::vector<std::vector<double>>> activ;
  };

  Forward forward(std::span<const int> tokens) const;
  std::vector<double> logits_at(const std::vector<double>& h) const;
  std::string greedy_or_sampled(const InferenceRequest& req, const ParamMap& gen_cfg) const;

  double embedding(int token, int d) const { return params_[static_cast<std::size_t>(token * hidden_ + d)]; }
  double mixing(int r, int c) const {
    return params_[static_cast<std::size_t>(vocab_ * hidden_ + r * hidden_ + c)];
  }

  int hidden_ = 0;
  int vocab_ = 0;
  int layers_ = 0;
  std::int64_t seed_ = 0;
  std::vector<double> params_;
  ToyTokenizer tokenizer_{ToyTokenizer::kMinVocab};
};

}  // namespace umm
