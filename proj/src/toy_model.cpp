#include "umm/toy_model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "umm/error.hpp"

namespace umm {

namespace {

constexpr std::string_view kAlphabet =
    " abcdefghijklmnopqrstuvwxyz0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ.,?!:;+-*/=()'";

constexpr std::string_view kCheckpointFormat = "umm-flat-params/1";

static_assert(std::endian::native == std::endian::little, "checkpoint layout assumes little-endian");

}  // namespace

int ToyTokenizer::max_vocab() { return static_cast<int>(kAlphabet.size()) + kFirstSymbol; }

ToyTokenizer::ToyTokenizer(int vocab) : vocab_(vocab) {
  if (vocab < kMinVocab || vocab > max_vocab()) {
    throw Error(ErrorCode::ConfigError, "toy vocab must be in [" + std::to_string(kMinVocab) + ", " +
                                            std::to_string(max_vocab()) + "]");
  }
  symbols_ = std::string(kAlphabet.substr(0, static_cast<std::size_t>(vocab - kFirstSymbol)));
}

std::vector<int> ToyTokenizer::encode(std::string_view text) const {
  std::vector<int> out;
  out.reserve(text.size());
  for (char c : text) {
    auto pos = symbols_.find(c);
    if (pos == std::string::npos) {
      pos = symbols_.find(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    out.push_back(pos == std::string::npos ? kUnk : kFirstSymbol + static_cast<int>(pos));
  }
  return out;
}

std::string ToyTokenizer::decode(std::span<const int> tokens) const {
  std::string out;
  for (int t : tokens) {
    if (t == kEos) break;
    if (t >= kFirstSymbol && t < vocab_) out += symbols_[static_cast<std::size_t>(t - kFirstSymbol)];
    else out += '_';
  }
  return out;
}

int ToyTokenizer::image_token(const Image& image) const {
  const auto n = static_cast<std::uint64_t>(vocab_ - kFirstSymbol);
  return kFirstSymbol + static_cast<int>(fnv1a64(image.bytes) % n);
}

const AdapterDescriptor& ToyTrainable::static_descriptor() {
  static const AdapterDescriptor d{
      "toy-trainable",
      CapabilitySet{true, false, false},
      {{"hidden_dim", ValueType::integer, true},
       {"vocab", ValueType::integer, true},
       {"seed", ValueType::integer, true},
       {"layers", ValueType::integer, false},
       {"init_scale", ValueType::number, false},
       {"weights", ValueType::string, false}},
      true};
  return d;
}

void ToyTrainable::do_load(const ParamMap& cfg) {
  const int hidden = cfg.at("hidden_dim").get<int>();
  const int vocab = cfg.at("vocab").get<int>();
  const int layers = cfg.value("layers", 8);
  if (hidden < 1) throw Error(ErrorCode::ConfigError, "toy-trainable: hidden_dim must be >= 1");
  if (layers < 1) throw Error(ErrorCode::ConfigError, "toy-trainable: layers must be >= 1");
  ToyTokenizer tok(vocab);

  hidden_ = hidden;
  vocab_ = vocab;
  layers_ = layers;
  seed_ = cfg.at("seed").get<std::int64_t>();
  tokenizer_ = tok;

  const double scale = cfg.value("init_scale", 0.5);
  Rng rng(mix_seed(static_cast<std::uint64_t>(seed_), "toy-trainable/init"));
  params_.assign(static_cast<std::size_t>(vocab * hidden + hidden * hidden), 0.0);
  const std::size_t n_embed = static_cast<std::size_t>(vocab * hidden);
  for (std::size_t i = 0; i < n_embed; ++i) params_[i] = scale * rng.normal();
  const double w_scale = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (std::size_t i = n_embed; i < params_.size(); ++i) params_[i] = w_scale * rng.normal();

  if (auto it = cfg.find("weights"); it != cfg.end()) {
    fs::path p = it->get<std::string>();
    if (fs::is_directory(p)) p /= "model.ckpt";
    if (!fs::exists(p)) throw Error(ErrorCode::LoadError, "toy-trainable: no weights at " + p.string());
    restore_checkpoint(p);
  }
}

std::string ToyTrainable::preprocessing_fingerprint() const {
  return "toy-char-tokenizer/v" + std::to_string(vocab_) + "+image-hash-token";
}

void ToyTrainable::set_parameters(std::vector<double> params) {
  if (params.size() != params_.size()) {
    throw Error(ErrorCode::PreconditionFailed, "parameter vector size mismatch");
  }
  params_ = std::move(params);
}

std::vector<int> ToyTrainable::build_sequence(const std::vector<Image>& images,
                                              std::string_view prompt, std::string_view response,
                                              bool with_eos, std::size_t* prompt_length) const {
  std::vector<int> seq;
  for (const auto& img : images) seq.push_back(tokenizer_.image_token(img));
  auto p = tokenizer_.encode(prompt);
  seq.insert(seq.end(), p.begin(), p.end());
  seq.push_back(ToyTokenizer::kSep);
  if (prompt_length) *prompt_length = seq.size();
  auto r = tokenizer_.encode(response);
  seq.insert(seq.end(), r.begin(), r.end());
  if (with_eos) seq.push_back(ToyTokenizer::kEos);
  return seq;
}

ToyTrainable::Forward ToyTrainable::forward(std::span<const int> tokens) const {
  const std::size_t T = tokens.size();
  const auto H = static_cast<std::size_t>(hidden_);
  Forward f;
  f.hidden.assign(static_cast<std::size_t>(layers_) + 1, {});
  f.pooled.assign(static_cast<std::size_t>(layers_), {});
  f.activ.assign(static_cast<std::size_t>(layers_), {});
  auto& h0 = f.hidden[0];
  h0.assign(T, std::vector<double>(H));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t d = 0; d < H; ++d) h0[t][d] = embedding(tokens[t], static_cast<int>(d));
  }
  for (std::size_t l = 0; l < static_cast<std::size_t>(layers_); ++l) {
    const auto& prev = f.hidden[l];
    auto& pooled = f.pooled[l];
    auto& activ = f.activ[l];
    auto& next = f.hidden[l + 1];
    pooled.assign(T, std::vector<double>(H, 0.0));
    activ.assign(T, std::vector<double>(H, 0.0));
    next.assign(T, std::vector<double>(H, 0.0));
    std::vector<double> running(H, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t d = 0; d < H; ++d) {
        running[d] += prev[t][d];
        pooled[t][d] = running[d] / static_cast<double>(t + 1);
      }
      for (std::size_t r = 0; r < H; ++r) {
        double a = 0.0;
        for (std::size_t c = 0; c < H; ++c) a += mixing(static_cast<int>(r), static_cast<int>(c)) * pooled[t][c];
        activ[t][r] = std::tanh(a);
        next[t][r] = prev[t][r] + activ[t][r];
      }
    }
  }
  return f;
}

std::vector<double> ToyTrainable::logits_at(const std::vector<double>& h) const {
  std::vector<double> logits(static_cast<std::size_t>(vocab_), 0.0);
  for (int v = 0; v < vocab_; ++v) {
    double s = 0.0;
    for (int d = 0; d < hidden_; ++d) s += embedding(v, d) * h[static_cast<std::size_t>(d)];
    logits[static_cast<std::size_t>(v)] = s;
  }
  return logits;
}

double ToyTrainable::loss_and_gradient(std::span<const TrainExample> batch,
                                       std::vector<double>* grad) const {
  if (batch.empty()) throw Error(ErrorCode::EmptyInput, "empty training batch");
  const auto H = static_cast<std::size_t>(hidden_);
  const auto V = static_cast<std::size_t>(vocab_);
  const std::size_t n_embed = V * H;
  if (grad) grad->assign(params_.size(), 0.0);

  // Count target tokens first so the gradient is of the batch mean.
  std::vector<std::vector<int>> seqs;
  std::vector<std::size_t> starts;
  std::size_t n_targets = 0;
  for (const auto& ex : batch) {
    std::size_t plen = 0;
    seqs.push_back(build_sequence(ex.images, ex.input, ex.target, true, &plen));
    starts.push_back(plen);
    n_targets += seqs.back().size() - plen;
  }
  const double inv_n = 1.0 / static_cast<double>(n_targets);

  double total = 0.0;
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    const auto& seq = seqs[b];
    const std::size_t T = seq.size();
    Forward f = forward(seq);
    const auto& top = f.hidden.back();
    // Position t predicts token t+1; targets are positions start-1 .. T-2.
    std::vector<std::vector<double>> g(T, std::vector<double>(H, 0.0));
    for (std::size_t t = starts[b] - 1; t + 1 < T; ++t) {
      auto logits = logits_at(top[t]);
      double mx = -std::numeric_limits<double>::infinity();
      for (double z : logits) mx = std::max(mx, z);
      double sum = 0.0;
      for (double z : logits) sum += std::exp(z - mx);
      const auto y = static_cast<std::size_t>(seq[t + 1]);
      total += (std::log(sum) + mx - logits[y]);
      if (!grad) continue;
      for (std::size_t v = 0; v < V; ++v) {
        const double p = std::exp(logits[v] - mx) / sum;
        const double dz = (p - (v == y ? 1.0 : 0.0)) * inv_n;
        if (dz == 0.0) continue;
        for (std::size_t d = 0; d < H; ++d) {
          (*grad)[v * H + d] += dz * top[t][d];
          g[t][d] += dz * params_[v * H + d];
        }
      }
    }
    if (!grad) continue;
    for (std::size_t l = static_cast<std::size_t>(layers_); l-- > 0;) {
      const auto& pooled = f.pooled[l];
      const auto& activ = f.activ[l];
      std::vector<std::vector<double>> dpooled(T, std::vector<double>(H, 0.0));
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t r = 0; r < H; ++r) {
          const double da = g[t][r] * (1.0 - activ[t][r] * activ[t][r]);
          if (da == 0.0) continue;
          for (std::size_t c = 0; c < H; ++c) {
            (*grad)[n_embed + r * H + c] += da * pooled[t][c];
            dpooled[t][c] += da * params_[n_embed + r * H + c];
          }
        }
      }
      // pooled[t] = mean_{s<=t} prev[s]  =>  dprev[s] += sum_{t>=s} dpooled[t]/(t+1)
      std::vector<double> suffix(H, 0.0);
      for (std::size_t t = T; t-- > 0;) {
        for (std::size_t d = 0; d < H; ++d) {
          suffix[d] += dpooled[t][d] / static_cast<double>(t + 1);
          g[t][d] += suffix[d];
        }
      }
    }
    for (std::size_t t = 0; t < T; ++t) {
      const auto tok = static_cast<std::size_t>(seq[t]);
      for (std::size_t d = 0; d < H; ++d) (*grad)[tok * H + d] += g[t][d];
    }
  }
  return total * inv_n;
}

double ToyTrainable::loss(std::span<const TrainExample> batch) const {
  return loss_and_gradient(batch, nullptr);
}

double ToyTrainable::train_step(std::span<const TrainExample> batch, double learning_rate) {
  std::vector<double> grad;
  const double l = loss_and_gradient(batch, &grad);
  if (!std::isfinite(l)) return l;
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i] -= learning_rate * grad[i];
  return l;
}

std::string ToyTrainable::greedy_or_sampled(const InferenceRequest& req,
                                            const ParamMap& gen_cfg) const {
  auto param = [&](const char* key, auto fallback) {
    if (auto it = req.params.find(key); it != req.params.end()) return it->get<decltype(fallback)>();
    if (gen_cfg.is_object()) {
      if (auto it = gen_cfg.find(key); it != gen_cfg.end()) return it->get<decltype(fallback)>();
    }
    return fallback;
  };
  const int max_new = param("max_new_tokens", 16);
  const int min_new = param("min_new_tokens", 1);
  const double temperature = param("temperature", 0.0);
  Rng rng(mix_seed(static_cast<std::uint64_t>(req.seed), req.sample_id));

  std::vector<int> seq = build_sequence(req.images, req.prompt, "", false, nullptr);
  std::vector<int> out;
  for (int step = 0; step < max_new; ++step) {
    Forward f = forward(seq);
    auto logits = logits_at(f.hidden.back().back());
    logits[ToyTokenizer::kSep] = -std::numeric_limits<double>::infinity();
    logits[ToyTokenizer::kUnk] = -std::numeric_limits<double>::infinity();
    if (step < min_new) logits[ToyTokenizer::kEos] = -std::numeric_limits<double>::infinity();
    int next = 0;
    if (temperature <= 0.0) {
      for (int v = 1; v < vocab_; ++v) {
        if (logits[static_cast<std::size_t>(v)] > logits[static_cast<std::size_t>(next)]) next = v;
      }
    } else {
      double mx = -std::numeric_limits<double>::infinity();
      for (double z : logits) mx = std::max(mx, z);
      std::vector<double> w(logits.size());
      double sum = 0.0;
      for (std::size_t v = 0; v < w.size(); ++v) sum += (w[v] = std::exp((logits[v] - mx) / temperature));
      double u = rng.uniform() * sum;
      next = static_cast<int>(w.size()) - 1;
      for (std::size_t v = 0; v < w.size(); ++v) {
        if ((u -= w[v]) < 0.0) {
          next = static_cast<int>(v);
          break;
        }
      }
    }
    if (next == ToyTokenizer::kEos) break;
    out.push_back(next);
    seq.push_back(next);
  }
  return tokenizer_.decode(out);
}

std::vector<InferenceResult> ToyTrainable::do_generate(std::span<const InferenceRequest> batch,
                                                       const ParamMap& gen_cfg) {
  std::vector<InferenceResult> out;
  out.reserve(batch.size());
  for (const auto& req : batch) {
    InferenceResult r;
    r.text = greedy_or_sampled(req, gen_cfg);
    out.push_back(std::move(r));
  }
  return out;
}

HiddenTrace ToyTrainable::trace(const InferenceRequest& req, std::string_view response) {
  if (!loaded()) throw Error(ErrorCode::NotLoaded, "toy-trainable used before load");
  HiddenTrace tr;
  auto seq = build_sequence(req.images, req.prompt, response, false, &tr.prompt_length);
  tr.response_length = seq.size() - tr.prompt_length;
  Forward f = forward(seq);
  tr.states.assign(f.hidden.begin() + 1, f.hidden.end());
  return tr;
}

std::string ToyTrainable::parameter_digest() const {
  return sha256_hex(std::string_view(reinterpret_cast<const char*>(params_.data()),
                                     params_.size() * sizeof(double)));
}

void ToyTrainable::save_checkpoint(const fs::path& file, const json& meta) const {
  json header{{"format", kCheckpointFormat},
              {"config", {{"hidden_dim", hidden_}, {"vocab", vocab_}, {"layers", layers_}}},
              {"tensors",
               json::array({{{"name", "embedding"}, {"shape", {vocab_, hidden_}}},
                            {{"name", "mixing"}, {"shape", {hidden_, hidden_}}}})},
              {"dtype", "float64-le"},
              {"meta", meta}};
  std::string blob = header.dump() + "\n";
  blob.append(reinterpret_cast<const char*>(params_.data()), params_.size() * sizeof(double));
  write_file_atomic(file, blob);
}

json ToyTrainable::restore_checkpoint(const fs::path& file) {
  const std::string blob = read_file(file);
  const auto nl = blob.find('\n');
  if (nl == std::string::npos) throw Error(ErrorCode::LoadError, "checkpoint has no header: " + file.string());
  json header;
  try {
    header = json::parse(blob.substr(0, nl));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::LoadError, "bad checkpoint header in " + file.string() + ": " + e.what());
  }
  if (header.value("format", "") != kCheckpointFormat) {
    throw Error(ErrorCode::LoadError, "unrecognized checkpoint format in " + file.string());
  }
  const auto& cfg = header.at("config");
  if (cfg.at("hidden_dim").get<int>() != hidden_ || cfg.at("vocab").get<int>() != vocab_) {
    throw Error(ErrorCode::LoadError, "checkpoint shape does not match loaded toy-trainable config");
  }
  const std::size_t bytes = blob.size() - nl - 1;
  if (bytes != params_.size() * sizeof(double)) {
    throw Error(ErrorCode::LoadError, "checkpoint payload size mismatch in " + file.string());
  }
  std::memcpy(params_.data(), blob.data() + nl + 1, bytes);
  return header.value("meta", json::object());
}

}  // namespace umm
