#pragma once

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgtext/autograd.hpp"
#include "kgtext/common.hpp"
#include "kgtext/kg.hpp"

namespace kgtext {

struct EmptyInput : std::runtime_error {
  EmptyInput() : std::runtime_error("empty input sequence") {}
};

class Vocabulary {
public:
  static constexpr int PAD = 0, UNK = 1, BOS = 2, EOS = 3;

  // Reserved tokens first with fixed ids, then corpus tokens ordered by
  // frequency (ties lexicographic) so ids are dense and stable.
  static Vocabulary build(const std::vector<const std::vector<TokenSeq>*>& corpora,
                          std::size_t max_size = 0) {
    Vocabulary v;
    for (const char* t : {"<pad>", "<unk>", "<bos>", "<eos>"}) v.push(t);
    for (std::string_view t : {kSep, kEof, kBlanked, kAttr}) v.push(std::string(t));
    v.push("and");
    v.push("is");
    std::map<std::string, std::size_t> counts;
    for (const auto* corpus : corpora) {
      for (const auto& seq : *corpus) {
        for (const auto& tok : seq.tokens) ++counts[tok];
      }
    }
    std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [tok, cnt] : sorted) {
      if (max_size && v.size() >= max_size) break;
      if (!v.ids_.count(tok)) v.push(tok);
    }
    return v;
  }

  int id(const std::string& tok) const {
    auto it = ids_.find(tok);
    return it == ids_.end() ? UNK : it->second;
  }
  const std::string& token(int id) const { return tokens_[id]; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& t : tokens_) {
      h = fnv1a(t, h);
      h = fnv1a("\x1f", h);
    }
    return h;
  }

  void push(std::string tok) {
    ids_.emplace(tok, static_cast<int>(tokens_.size()));
    tokens_.push_back(std::move(tok));
  }

private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct ModelDims {
  int embed = 300;
  int hidden = 250;
  double dropout = 0.2;
  int max_decode_steps = 40;
};

struct DecodeStep {
  std::string surface;
  int vocab_id = -1;   // generation id, -1 if the step resolved to a pure copy
  int copy_pos = -1;   // dominant source position, -1 if generated
};

struct DecodeResult {
  TokenSeq tokens;
  std::vector<DecodeStep> steps;
};

// Shared encoder/decoder seq2seq with additive attention, a bilinear copy
// mechanism and output-type conditioning (decoder cell state initialized with
// a per-modality embedding). T = float for training, double for grad checks.
template <class T>
class Seq2SeqModel {
public:
  using Mat = typename Tape<T>::Mat;
  using Ref = typename Tape<T>::Ref;

  struct Param {
    std::string name;
    Mat value;
    Mat grad;
  };

  Seq2SeqModel(Vocabulary vocab, ModelDims dims, std::uint64_t seed)
      : vocab_(std::move(vocab)), dims_(dims), seed_(seed) {
    const int V = static_cast<int>(vocab_.size());
    const int E = dims_.embed;
    const int H = dims_.hidden;
    add_param("emb", E, V);
    add_param("enc_fwd_W", 4 * H, E + H);
    add_param("enc_fwd_b", 4 * H, 1);
    add_param("enc_bwd_W", 4 * H, E + H);
    add_param("enc_bwd_b", 4 * H, 1);
    add_param("dec_W", 4 * H, E + H);
    add_param("dec_b", 4 * H, 1);
    add_param("init_W", H, 2 * H);
    add_param("init_b", H, 1);
    add_param("type_emb", H, 2);  // col 0 = TEXT, col 1 = GRAPH
    add_param("att_W", H, H);
    add_param("att_U", H, 2 * H);
    add_param("att_v", 1, H);
    add_param("copy_W", 2 * H, H);
    add_param("gate_w", 1, 3 * H);
    add_param("gate_b", 1, 1);
    add_param("out_W", V, 3 * H);
    add_param("out_b", V, 1);
    init_params();
  }

  const Vocabulary& vocab() const { return vocab_; }
  const ModelDims& dims() const { return dims_; }
  std::uint64_t seed() const { return seed_; }

  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }
  Param& param(const std::string& name) {
    for (auto& p : params_) {
      if (p.name == name) return p;
    }
    throw std::logic_error("no such param: " + name);
  }

  std::size_t num_parameters() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

  void zero_grads() {
    for (auto& p : params_) p.grad.setZero();
  }

  struct Encoded {
    std::vector<int> src_ids;
    std::vector<std::string> src_surface;
    Ref states = -1;      // (2H x n) per-position states
    Ref final_state = -1; // (H x 1) projected decoder init
  };

  // Bidirectional encode. Dropout on embedded inputs iff train_mode;
  // dropout_rng must then be supplied.
  Encoded encode(Tape<T>& tape, const TokenSeq& src, bool train_mode,
                 Rng* dropout_rng = nullptr) const {
    if (src.tokens.empty()) throw EmptyInput();
    const int H = dims_.hidden;
    const std::size_t n = src.tokens.size();

    Encoded enc;
    enc.src_surface = src.tokens;
    enc.src_ids.reserve(n);
    for (const auto& t : src.tokens) enc.src_ids.push_back(vocab_.id(t));

    std::vector<Ref> xs(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = embed(tape, enc.src_ids[i], train_mode, dropout_rng);
    }

    Ref zero_h = tape.leaf(Mat::Zero(H, 1));
    std::vector<Ref> fwd(n), bwd(n);
    Ref h = zero_h, c = zero_h;
    for (std::size_t i = 0; i < n; ++i) {
      lstm_step(tape, "enc_fwd", xs[i], h, c);
      fwd[i] = h;
    }
    Ref fwd_final = h;
    h = zero_h;
    c = zero_h;
    for (std::size_t i = n; i-- > 0;) {
      lstm_step(tape, "enc_bwd", xs[i], h, c);
      bwd[i] = h;
    }
    Ref bwd_final = h;

    std::vector<Ref> both(n);
    for (std::size_t i = 0; i < n; ++i) both[i] = tape.concat_rows({fwd[i], bwd[i]});
    enc.states = tape.concat_cols(both);

    Ref finals = tape.concat_rows({fwd_final, bwd_final});
    enc.final_state =
        tape.add(tape.matmul(P(tape, "init_W"), finals), P(tape, "init_b"));
    return enc;
  }

  struct StepOut {
    Ref pgen = -1;   // (V x 1)
    Ref pcopy = -1;  // (n x 1)
    Ref gate = -1;   // (1 x 1)
  };

  // One decoder step: advances (h, c) in place and returns the output heads.
  StepOut decoder_step(Tape<T>& tape, const Encoded& enc, int prev_token_id, Ref& h, Ref& c,
                       bool train_mode, Rng* dropout_rng = nullptr) const {
    Ref x = embed(tape, prev_token_id, train_mode, dropout_rng);
    lstm_step(tape, "dec", x, h, c);

    // additive attention over the concatenated encoder states
    Ref q = tape.matmul(P(tape, "att_W"), h);
    Ref ua = tape.matmul(P(tape, "att_U"), enc.states);
    Ref scores = tape.matmul(P(tape, "att_v"), tape.tanh_(tape.bcast_add(ua, q)));
    Ref alpha = tape.softmax(tape.transpose(scores));
    Ref ctx = tape.matmul(enc.states, alpha);

    // bilinear copy scores over encoder states
    Ref copy_scores = tape.matmul(tape.transpose(enc.states), tape.matmul(P(tape, "copy_W"), h));

    Ref feat = tape.concat_rows({h, ctx});
    StepOut out;
    out.pgen = tape.softmax(tape.add(tape.matmul(P(tape, "out_W"), feat), P(tape, "out_b")));
    out.pcopy = tape.softmax(copy_scores);
    out.gate = tape.sigmoid(tape.add(tape.matmul(P(tape, "gate_w"), feat), P(tape, "gate_b")));
    return out;
  }

  Ref initial_hidden(const Encoded& enc) const { return enc.final_state; }

  Ref initial_cell(Tape<T>& tape, Modality output_type) const {
    const Param& te = params_[type_emb_idx_];
    return tape.param_col(te.value, const_cast<Mat*>(&te.grad), output_type == Modality::TEXT ? 0 : 1);
  }

  // Teacher-forced mean NLL per target token (incl. the terminal EOS) under
  // the copy-augmented output distribution.
  Ref nll_loss(Tape<T>& tape, const TokenSeq& src, const TokenSeq& tgt, Modality output_type,
               bool train_mode, Rng* dropout_rng = nullptr) const {
    if (tgt.tokens.empty()) throw EmptyInput();
    Encoded enc = encode(tape, src, train_mode, dropout_rng);
    Ref h = initial_hidden(enc);
    Ref c = initial_cell(tape, output_type);

    std::vector<Ref> losses;
    int prev = Vocabulary::BOS;
    const std::size_t m = tgt.tokens.size();
    for (std::size_t t = 0; t <= m; ++t) {
      StepOut step = decoder_step(tape, enc, prev, h, c, train_mode, dropout_rng);
      int target_id;
      std::vector<int> copy_pos;
      if (t < m) {
        const std::string& surface = tgt.tokens[t];
        target_id = vocab_.id(surface);
        for (std::size_t i = 0; i < enc.src_surface.size(); ++i) {
          if (enc.src_surface[i] == surface) copy_pos.push_back(static_cast<int>(i));
        }
        // OOV targets present in the source train as pure copy events
        if (target_id == Vocabulary::UNK && !copy_pos.empty()) target_id = -1;
        prev = vocab_.id(surface);
      } else {
        target_id = Vocabulary::EOS;
      }
      losses.push_back(tape.mixture_nll(step.pgen, step.pcopy, step.gate, target_id, copy_pos));
    }
    return tape.scale(tape.sum(losses), T(1) / T(m + 1));
  }

  // Full output distribution of one decoder step over vocab + source
  // positions: [(1-g) * pgen ; g * pcopy]. Sums to 1.
  std::vector<double> step_distribution(Tape<T>& tape, const Encoded& enc, int prev_token_id,
                                        Ref& h, Ref& c) const {
    StepOut s = decoder_step(tape, enc, prev_token_id, h, c, false);
    double g = static_cast<double>(tape.val(s.gate)(0, 0));
    std::vector<double> dist;
    const auto& pg = tape.val(s.pgen);
    const auto& pc = tape.val(s.pcopy);
    dist.reserve(static_cast<std::size_t>(pg.rows() + pc.rows()));
    for (int i = 0; i < pg.rows(); ++i) dist.push_back((1.0 - g) * static_cast<double>(pg(i, 0)));
    for (int i = 0; i < pc.rows(); ++i) dist.push_back(g * static_cast<double>(pc(i, 0)));
    return dist;
  }

  // Greedy decode: per step, argmax over surface forms with copy and
  // generation probabilities of identical surfaces aggregated.
  DecodeResult decode_greedy(const TokenSeq& src, Modality output_type) const {
    if (src.tokens.empty()) throw EmptyInput();
    Tape<T> tape;
    Encoded enc = encode(tape, src, false);
    Ref h = initial_hidden(enc);
    Ref c = initial_cell(tape, output_type);

    DecodeResult res;
    res.tokens.modality = output_type;
    int prev = Vocabulary::BOS;
    for (int step = 0; step < dims_.max_decode_steps; ++step) {
      StepOut s = decoder_step(tape, enc, prev, h, c, false);
      const auto& pg = tape.val(s.pgen);
      const auto& pc = tape.val(s.pcopy);
      double g = static_cast<double>(tape.val(s.gate)(0, 0));

      std::map<std::string, double> score;  // ordered => deterministic ties
      for (int v = 0; v < pg.rows(); ++v) {
        if (v == Vocabulary::PAD || v == Vocabulary::BOS) continue;
        score[vocab_.token(v)] += (1.0 - g) * static_cast<double>(pg(v, 0));
      }
      std::map<std::string, std::pair<double, int>> copy_best;  // surface -> (sum, best pos)
      for (int i = 0; i < pc.rows(); ++i) {
        double p = g * static_cast<double>(pc(i, 0));
        auto& cb = copy_best[enc.src_surface[i]];
        if (p > 0 && (cb.first == 0 || pc(i, 0) > pc(cb.second, 0))) cb.second = i;
        cb.first += p;
        score[enc.src_surface[i]] += p;
      }
      const std::string* best = nullptr;
      double best_p = -1;
      for (const auto& [surf, p] : score) {
        if (p > best_p) {
          best_p = p;
          best = &surf;
        }
      }
      if (*best == vocab_.token(Vocabulary::EOS)) break;
      DecodeStep ds;
      ds.surface = *best;
      int vid = vocab_.id(*best);
      double gen_part = (vid != Vocabulary::UNK || *best == vocab_.token(Vocabulary::UNK))
                            ? (1.0 - g) * static_cast<double>(pg(vid, 0))
                            : 0.0;
      auto cb = copy_best.find(*best);
      double copy_part = cb == copy_best.end() ? 0.0 : cb->second.first;
      if (copy_part > gen_part) {
        ds.copy_pos = cb->second.second;
      } else {
        ds.vocab_id = vid;
      }
      res.tokens.tokens.push_back(ds.surface);
      res.steps.push_back(ds);
      prev = vid;
    }
    return res;
  }

private:
  Ref P(Tape<T>& tape, const std::string& name) const {
    const Param& p = const_cast<Seq2SeqModel*>(this)->param(name);
    return tape.param(p.value, const_cast<Mat*>(&p.grad));
  }

  Ref embed(Tape<T>& tape, int token_id, bool train_mode, Rng* dropout_rng) const {
    const Param& e = params_[emb_idx_];
    Ref x = tape.param_col(e.value, const_cast<Mat*>(&e.grad), token_id);
    if (train_mode && dims_.dropout > 0) {
      // inverted dropout with a deterministic mask stream
      Mat mask(dims_.embed, 1);
      const T keep = T(1) - static_cast<T>(dims_.dropout);
      for (int i = 0; i < dims_.embed; ++i) {
        mask(i, 0) = dropout_rng->bernoulli(dims_.dropout) ? T(0) : T(1) / keep;
      }
      x = tape.hadamard(x, tape.leaf(std::move(mask)));
    }
    return x;
  }

  // gate layout within the 4H block: [input; forget; cell; output]
  void lstm_step(Tape<T>& tape, const std::string& prefix, Ref x, Ref& h, Ref& c) const {
    const int H = dims_.hidden;
    Ref xh = tape.concat_rows({x, h});
    Ref z = tape.add(tape.matmul(P(tape, prefix + "_W"), xh), P(tape, prefix + "_b"));
    Ref i = tape.sigmoid(tape.slice_rows(z, 0, H));
    Ref f = tape.sigmoid(tape.slice_rows(z, H, H));
    Ref g = tape.tanh_(tape.slice_rows(z, 2 * H, H));
    Ref o = tape.sigmoid(tape.slice_rows(z, 3 * H, H));
    c = tape.add(tape.hadamard(f, c), tape.hadamard(i, g));
    h = tape.hadamard(o, tape.tanh_(c));
  }

  void add_param(std::string name, int rows, int cols) {
    Param p;
    p.name = std::move(name);
    p.value = Mat::Zero(rows, cols);
    p.grad = Mat::Zero(rows, cols);
    if (p.name == "emb") emb_idx_ = params_.size();
    if (p.name == "type_emb") type_emb_idx_ = params_.size();
    params_.push_back(std::move(p));
  }

  // uniform(-0.08, 0.08) weights, zero biases, forget-gate bias +1
  void init_params() {
    Rng rng = substream(seed_, "init");
    const int H = dims_.hidden;
    for (auto& p : params_) {
      bool bias = p.name.ends_with("_b");
      if (bias) {
        p.value.setZero();
      } else {
        for (int j = 0; j < p.value.cols(); ++j) {
          for (int i = 0; i < p.value.rows(); ++i) {
            p.value(i, j) = static_cast<T>(rng.uniform(-0.08, 0.08));
          }
        }
      }
      if (p.name == "enc_fwd_b" || p.name == "enc_bwd_b" || p.name == "dec_b") {
        p.value.middleRows(H, H).setConstant(T(1));
      }
    }
  }

  Vocabulary vocab_;
  ModelDims dims_;
  std::uint64_t seed_;
  std::vector<Param> params_;
  std::size_t emb_idx_ = 0;
  std::size_t type_emb_idx_ = 0;
};

// Central finite differences vs. reverse mode over every parameter element.
// Returns the worst relative error. Dropout is off (the loss must be a pure
// function of the parameters).
template <class T>
double gradient_check(Seq2SeqModel<T>& model, const TokenSeq& src, const TokenSeq& tgt,
                      Modality output_type, double epsilon = 1e-4) {
  model.zero_grads();
  {
    Tape<T> tape;
    auto loss = model.nll_loss(tape, src, tgt, output_type, false);
    tape.backward(loss);
  }
  auto eval = [&]() {
    Tape<T> tape;
    auto loss = model.nll_loss(tape, src, tgt, output_type, false);
    return static_cast<double>(tape.val(loss)(0, 0));
  };
  double worst = 0;
  for (auto& p : model.params()) {
    for (int j = 0; j < p.value.cols(); ++j) {
      for (int i = 0; i < p.value.rows(); ++i) {
        T saved = p.value(i, j);
        p.value(i, j) = saved + static_cast<T>(epsilon);
        double up = eval();
        p.value(i, j) = saved - static_cast<T>(epsilon);
        double down = eval();
        p.value(i, j) = saved;
        double numeric = (up - down) / (2 * epsilon);
        double analytic = static_cast<double>(p.grad(i, j));
        double denom = std::max(1e-6, std::abs(numeric) + std::abs(analytic));
        worst = std::max(worst, std::abs(numeric - analytic) / denom);
      }
    }
  }
  return worst;
}

}  // namespace kgtext
