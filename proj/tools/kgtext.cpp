// Command-line entry point: data building, training, conversion, evaluation,
// checkpoint selection and the noise-ablation grid over the JSONL interchange
// format. Exit codes: 0 ok, 2 config/usage error, 3 data error, 4 training
// aborted on a non-finite gradient.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgtext/checkpoint.hpp"
#include "kgtext/data.hpp"
#include "kgtext/metrics.hpp"
#include "kgtext/noise.hpp"
#include "kgtext/rules.hpp"
#include "kgtext/training.hpp"

using namespace kgtext;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kConfigError = 2, kDataError = 3, kTrainingAborted = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

NoiseFn noise_fn_from_name(const std::string& name) {
  for (NoiseFn f : kAllNoiseFns) {
    if (name == noise_fn_name(f)) return f;
  }
  throw ConfigError("unknown noise function: " + name);
}

Regime regime_from_name(const std::string& name) {
  if (name == "sampled") return Regime::SAMPLED;
  if (name == "composed") return Regime::COMPOSED;
  throw ConfigError("unknown regime: " + name);
}

// Everything a training run needs, loadable from a JSON config file with
// command-line overrides applied on top.
struct RunConfig {
  std::string mode = "unsupervised";  // or "supervised"
  std::string train_path, val_path, out_dir = ".";
  std::uint64_t seed = 0;
  ModelDims dims;
  TrainConfig train;
  NoiseConfig noise;
  bool no_noise = false;
  std::size_t vocab_max = 0;

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigError("config parse error: " + std::string(e.what()));
    }
    mode = j.value("mode", mode);
    train_path = j.value("train", train_path);
    val_path = j.value("val", val_path);
    out_dir = j.value("out", out_dir);
    seed = j.value("seed", seed);
    vocab_max = j.value("vocab_max", vocab_max);
    dims.embed = j.value("embed", dims.embed);
    dims.hidden = j.value("hidden", dims.hidden);
    dims.dropout = j.value("dropout", dims.dropout);
    dims.max_decode_steps = j.value("max_decode_steps", dims.max_decode_steps);
    train.lr = j.value("lr", train.lr);
    train.batch_train = j.value("batch_train", train.batch_train);
    train.batch_backtranslate = j.value("batch_backtranslate", train.batch_backtranslate);
    train.max_epochs = j.value("max_epochs", train.max_epochs);
    train.patience_supervised = j.value("patience_supervised", train.patience_supervised);
    train.max_unsup_iterations = j.value("max_unsup_iterations", train.max_unsup_iterations);
    train.grad_clip = j.value("grad_clip", train.grad_clip);
    if (j.contains("regime")) train.regime = regime_from_name(j["regime"].get<std::string>());
    if (j.contains("noise")) {
      const auto& n = j["noise"];
      noise.p_drop = n.value("p_drop", noise.p_drop);
      noise.p_blank = n.value("p_blank", noise.p_blank);
      noise.p_repeat = n.value("p_repeat", noise.p_repeat);
      noise.k_text = n.value("k_text", noise.k_text);
      noise.k_graph = n.value("k_graph", noise.k_graph);
      no_noise = n.value("no_noise", no_noise);
      if (n.contains("enabled")) {
        noise.enabled.clear();
        for (const auto& name : n["enabled"]) {
          noise.enabled.push_back(noise_fn_from_name(name.get<std::string>()));
        }
      }
    }
  }

  void apply_noise_flags(const std::string& only, const std::string& exclude) {
    if (!only.empty() && !exclude.empty()) {
      throw ConfigError("--noise-only and --noise-exclude are mutually exclusive");
    }
    if (!only.empty()) noise.enabled = {noise_fn_from_name(only)};
    if (!exclude.empty()) {
      NoiseFn ex = noise_fn_from_name(exclude);
      noise.enabled.clear();
      for (NoiseFn f : kAllNoiseFns) {
        if (f != ex) noise.enabled.push_back(f);
      }
    }
  }
};

struct Dataset {
  CorpusPools pools;                                     // unlabeled train pools
  std::vector<std::pair<TokenSeq, TokenSeq>> sup_pairs;  // (graph, text)
  std::vector<ValInstance> val;
};

TokenSeq text_seq(const std::string& s) { return {Modality::TEXT, split_ws(s)}; }

Dataset load_dataset(const RunConfig& cfg) {
  Dataset d;
  if (cfg.train_path.empty()) throw ConfigError("config key 'train' is required");
  for (const auto& r : read_jsonl(cfg.train_path)) {
    TokenSeq g = serialize(r.graph);
    d.pools.graphs.push_back(g);
    for (const auto& t : r.texts) d.pools.texts.push_back(text_seq(t));
    if (!r.texts.empty()) d.sup_pairs.push_back({g, text_seq(r.texts[0])});
  }
  if (!cfg.val_path.empty()) {
    for (const auto& r : read_jsonl(cfg.val_path)) {
      ValInstance v;
      v.graph = serialize(r.graph);
      v.graph_refs.push_back(r.graph);
      for (const auto& t : r.texts) v.text_refs.push_back(split_ws(t));
      if (!r.texts.empty()) v.text_tokens = split_ws(r.texts[0]);
      d.val.push_back(std::move(v));
    }
  }
  d.pools.set_pairs(d.sup_pairs);
  return d;
}

void write_log_header(std::ofstream& log) {
  log << "iteration\tL_denoise\tL_back\tM_unsup\tM_val\tval_BLEU\tval_F1\n";
}

template <class T>
void log_row(std::ofstream& log, std::uint64_t iteration, double l_denoise, double l_back,
             const Seq2SeqModel<T>& model, const Dataset& d, std::uint64_t seed) {
  auto unsup = m_unsup(model, d.pools.texts, d.pools.graphs);
  double m_unsup_score = (unsup.text_bleu / 100.0 + unsup.graph_f1) / 2.0;
  double val_bleu = 0, val_f1 = 0, m_val_score = 0;
  if (!d.val.empty()) {
    val_bleu = m_val(model, d.val, Task::G2T, seed);
    val_f1 = m_val(model, d.val, Task::T2G, seed);
    m_val_score = (val_bleu / 100.0 + val_f1) / 2.0;
  }
  log << iteration << '\t' << l_denoise << '\t' << l_back << '\t' << m_unsup_score << '\t'
      << m_val_score << '\t' << val_bleu << '\t' << val_f1 << '\n';
  log.flush();
}

int cmd_train(const RunConfig& cfg) {
  Dataset d = load_dataset(cfg);
  fs::create_directories(cfg.out_dir);
  std::ofstream log(fs::path(cfg.out_dir) / "log.tsv");
  if (!log) throw MissingFile(cfg.out_dir + "/log.tsv");
  write_log_header(log);

  auto vocab = Vocabulary::build({&d.pools.graphs, &d.pools.texts}, cfg.vocab_max);
  Seq2SeqModel<float> model(vocab, cfg.dims, cfg.seed);
  Adam<float> adam(model, cfg.train.lr);
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  auto lex = Lexicon::bundled();
  auto ckpt_path = [&](std::uint64_t i) {
    return (fs::path(cfg.out_dir) / ("ckpt-" + std::to_string(i) + ".bin")).string();
  };

  if (cfg.mode == "supervised") {
    if (d.sup_pairs.empty()) throw ConfigError("supervised mode needs paired training data");
    double best = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    for (std::uint64_t epoch = 0; epoch < tc.max_epochs; ++epoch) {
      double loss = supervised_epoch(model, adam, d.pools.pairs(), tc, epoch);
      save_checkpoint(ckpt_path(epoch), model, epoch);
      log_row(log, epoch, loss, 0.0, model, d, cfg.seed);
      if (!d.val.empty()) {
        std::vector<std::pair<TokenSeq, TokenSeq>> val_pairs;
        for (const auto& v : d.val) {
          if (!v.text_tokens.empty()) {
            val_pairs.push_back({v.graph, {Modality::TEXT, v.text_tokens}});
          }
        }
        double val_loss = val_pairs.empty() ? loss : supervised_loss(model, val_pairs);
        if (val_loss < best) {
          best = val_loss;
          since_best = 0;
        } else if (++since_best >= tc.patience_supervised) {
          std::cout << "early stop at epoch " << epoch << " (best val loss " << best << ")\n";
          break;
        }
      }
    }
  } else if (cfg.mode == "unsupervised") {
    auto st = pretrain_denoise_epoch(model, adam, d.pools, tc.regime, cfg.noise, tc, lex,
                                     cfg.no_noise);
    save_checkpoint(ckpt_path(0), model, 0);
    log_row(log, 0, st.mean_loss, 0.0, model, d, cfg.seed);
    for (std::uint64_t it = 1; it <= tc.max_unsup_iterations; ++it) {
      auto is = unsupervised_iteration(model, adam, d.pools, tc.regime, cfg.noise, tc, lex,
                                       it, cfg.no_noise);
      save_checkpoint(ckpt_path(it), model, it);
      log_row(log, it, is.mean_denoise_loss, is.mean_back_loss, model, d, cfg.seed);
    }
  } else {
    throw ConfigError("unknown mode: " + cfg.mode);
  }
  std::cout << "wrote checkpoints and log.tsv to " << cfg.out_dir << "\n";
  return kOk;
}

int cmd_convert(const std::string& mode, const std::string& in_path, const std::string& out_path,
                const std::string& ckpt) {
  auto records = read_jsonl(in_path);
  auto lex = Lexicon::bundled();
  std::optional<LoadedCheckpoint<float>> loaded;
  if (mode.rfind("model-", 0) == 0) {
    if (ckpt.empty()) throw ConfigError("--checkpoint is required for model modes");
    loaded = load_checkpoint<float>(ckpt);
  }

  std::vector<PairRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    PairRecord o = r;
    if (mode == "rule-g2t") {
      o.texts = {join_ws(rule_g2t(serialize(r.graph)).tokens)};
    } else if (mode == "rule-t2g") {
      if (r.texts.empty()) throw MalformedRecord(r.id, "no text to convert");
      auto g = rule_t2g(r.texts[0], lex);
      o.graph = g;
      o.texts = {join_ws(serialize(g).tokens)};
    } else if (mode == "model-g2t") {
      auto dec = loaded->model.decode_greedy(serialize(r.graph), Modality::TEXT);
      o.texts = {join_ws(dec.tokens.tokens)};
    } else if (mode == "model-t2g") {
      if (r.texts.empty()) throw MalformedRecord(r.id, "no text to convert");
      auto dec = loaded->model.decode_greedy(text_seq(r.texts[0]), Modality::GRAPH);
      o.graph = deserialize(dec.tokens).graph;
      // keep the raw serialization so evaluate can count malformed segments
      o.texts = {join_ws(dec.tokens.tokens)};
    } else {
      throw ConfigError("unknown convert mode: " + mode);
    }
    out.push_back(std::move(o));
  }
  write_jsonl(out_path, out);
  return kOk;
}

int cmd_evaluate(const std::string& task, const std::string& hyp_path,
                 const std::string& ref_path) {
  auto hyp = read_jsonl(hyp_path);
  auto ref = read_jsonl(ref_path);
  std::map<std::string, const PairRecord*> ref_by_id;
  for (const auto& r : ref) ref_by_id[r.id] = &r;

  json result;
  result["n_instances"] = hyp.size();
  std::size_t malformed = 0;
  if (task == "g2t") {
    std::vector<TextEvalInstance> insts;
    double chrf_sum = 0;
    for (const auto& h : hyp) {
      auto it = ref_by_id.find(h.id);
      if (it == ref_by_id.end()) throw MalformedRecord(h.id, "no matching reference record");
      TextEvalInstance inst;
      if (!h.texts.empty()) inst.prediction = split_ws(h.texts[0]);
      for (const auto& t : it->second->texts) inst.references.push_back(split_ws(t));
      insts.push_back(std::move(inst));
    }
    result["bleu"] = insts.empty() ? 0.0 : bleu(insts);
    result["chrf_pp"] = insts.empty() ? 0.0 : chrf_pp(insts);
    result["fact_p"] = 0.0;
    result["fact_r"] = 0.0;
    result["fact_f1"] = 0.0;
  } else if (task == "t2g") {
    std::vector<GraphEvalInstance> insts;
    for (const auto& h : hyp) {
      auto it = ref_by_id.find(h.id);
      if (it == ref_by_id.end()) throw MalformedRecord(h.id, "no matching reference record");
      GraphEvalInstance inst;
      if (!h.texts.empty()) {
        // texts[0] carries the raw serialization when produced by convert
        auto res = deserialize({Modality::GRAPH, split_ws(h.texts[0])});
        inst.prediction = res.graph;
        malformed += res.malformed;
      } else {
        inst.prediction = h.graph;
      }
      inst.references.push_back(it->second->graph);
      insts.push_back(std::move(inst));
    }
    auto f1 = insts.empty() ? F1Result{} : fact_f1(insts);
    result["bleu"] = 0.0;
    result["chrf_pp"] = 0.0;
    result["fact_p"] = f1.precision;
    result["fact_r"] = f1.recall;
    result["fact_f1"] = f1.f1;
  } else {
    throw ConfigError("unknown task: " + task);
  }
  result["n_malformed"] = malformed;
  std::cout << result.dump(2) << "\n";
  return kOk;
}

int cmd_select(const std::string& ckpt_dir, const std::string& criterion, const RunConfig& cfg) {
  Dataset d = load_dataset(cfg);
  std::vector<fs::path> files;
  if (!fs::exists(ckpt_dir)) throw MissingFile(ckpt_dir);
  for (const auto& e : fs::directory_iterator(ckpt_dir)) {
    if (e.path().extension() == ".bin") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no .bin checkpoints in " + ckpt_dir);

  std::vector<double> scores;
  std::cout << "checkpoint\t" << criterion << "\n";
  for (const auto& f : files) {
    auto loaded = load_checkpoint<float>(f.string());
    double score = 0;
    if (criterion == "m_unsup") {
      auto s = m_unsup(loaded.model, d.pools.texts, d.pools.graphs);
      score = (s.text_bleu / 100.0 + s.graph_f1) / 2.0;
    } else if (criterion == "m_val_bleu") {
      score = m_val(loaded.model, d.val, Task::G2T, cfg.seed);
    } else if (criterion == "m_val_f1") {
      score = m_val(loaded.model, d.val, Task::T2G, cfg.seed);
    } else {
      throw ConfigError("unknown criterion: " + criterion);
    }
    scores.push_back(score);
    std::cout << f.filename().string() << "\t" << score << "\n";
  }
  std::size_t best = select_checkpoint(scores);
  std::cout << "best\t" << files[best].filename().string() << "\n";
  return kOk;
}

int cmd_build_data(const std::string& dataset, const std::string& raw, const std::string& out_dir,
                   bool ball_subset, std::uint64_t seed, std::size_t synth_n) {
  std::vector<PairRecord> records;
  if (dataset == "synth") {
    SynthSpec spec;
    spec.n_instances = synth_n;
    records = synth_corpus(spec, seed);
  } else if (dataset == "webnlg") {
    records = load_webnlg(raw);
  } else if (dataset == "vg") {
    auto conv = regions_to_instances(load_vg_regions(raw));
    records = std::move(conv.pairs);
    if (conv.dropped_empty) {
      std::cout << "dropped " << conv.dropped_empty << " empty regions\n";
    }
    if (ball_subset) records = vg_ball_filter(records);
    auto split = split_and_clean(std::move(records), seed);
    records = std::move(split.pairs);
    if (split.removed_from_train) {
      std::cout << "removed " << split.removed_from_train << " duplicated train instances\n";
    }
  } else {
    throw ConfigError("unknown dataset: " + dataset);
  }

  fs::create_directories(out_dir);
  std::map<std::string, std::vector<PairRecord>> by_split;
  for (auto& r : records) by_split[r.split].push_back(std::move(r));
  for (const auto& [split, rs] : by_split) {
    write_jsonl((fs::path(out_dir) / (split + ".jsonl")).string(), rs);
  }

  records.clear();
  for (auto& [split, rs] : by_split) {
    for (auto& r : rs) records.push_back(std::move(r));
  }
  auto st = corpus_stats(records);
  json stats;
  for (const auto& [split, n] : st.split_sizes) stats["split_sizes"][split] = n;
  stats["relation_types"] = st.relation_types;
  stats["avg_facts_per_graph"] = st.avg_facts_per_graph;
  stats["avg_tokens_per_text"] = st.avg_tokens_per_text;
  stats["avg_pct_text_tokens_in_graph"] = st.avg_pct_text_tokens_in_graph;
  stats["avg_pct_graph_tokens_in_text"] = st.avg_pct_graph_tokens_in_text;
  std::ofstream sf(fs::path(out_dir) / "stats.json");
  sf << stats.dump(2) << "\n";
  std::cout << stats.dump(2) << "\n";
  return kOk;
}

// One ablation cell: fresh model, denoising pretraining plus one
// backtranslation iteration, scored on val (or train when no val given).
struct CellResult {
  double bleu = 0;
  double f1 = 0;
};

CellResult run_cell(const RunConfig& cfg, const Dataset& d, Regime regime,
                    const std::vector<NoiseFn>& enabled, bool no_noise) {
  auto vocab = Vocabulary::build({&d.pools.graphs, &d.pools.texts}, cfg.vocab_max);
  Seq2SeqModel<float> model(vocab, cfg.dims, cfg.seed);
  Adam<float> adam(model, cfg.train.lr);
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  NoiseConfig ncfg = cfg.noise;
  ncfg.enabled = enabled;
  auto lex = Lexicon::bundled();
  pretrain_denoise_epoch(model, adam, d.pools, regime, ncfg, tc, lex, no_noise);
  unsupervised_iteration(model, adam, d.pools, regime, ncfg, tc, lex, 0, no_noise);

  CellResult res;
  std::vector<TextEvalInstance> t_insts;
  std::vector<GraphEvalInstance> g_insts;
  for (const auto& v : d.val) {
    if (!v.graph.tokens.empty() && !v.text_refs.empty()) {
      TextEvalInstance ti;
      ti.references = v.text_refs;
      ti.prediction = model.decode_greedy(v.graph, Modality::TEXT).tokens.tokens;
      t_insts.push_back(std::move(ti));
    }
    if (!v.text_tokens.empty()) {
      GraphEvalInstance gi;
      gi.references = v.graph_refs;
      auto out = model.decode_greedy({Modality::TEXT, v.text_tokens}, Modality::GRAPH);
      gi.prediction = deserialize(out.tokens).graph;
      g_insts.push_back(std::move(gi));
    }
  }
  if (!t_insts.empty()) res.bleu = bleu(t_insts);
  if (!g_insts.empty()) res.f1 = fact_f1(g_insts).f1;
  return res;
}

int cmd_ablate(RunConfig cfg, const std::string& regime_flag, const std::string& only,
               bool no_noise) {
  Dataset d = load_dataset(cfg);
  if (d.val.empty()) throw ConfigError("ablate needs a 'val' dataset for scoring");

  struct Cell {
    std::string name;
    Regime regime;
    std::vector<NoiseFn> enabled;
    bool no_noise;
  };
  std::vector<Cell> cells;
  if (no_noise) {
    cells.push_back({"no-noise", Regime::SAMPLED, {}, true});
  } else if (!only.empty()) {
    Regime regime = regime_from_name(regime_flag.empty() ? "sampled" : regime_flag);
    cells.push_back({std::string(regime == Regime::SAMPLED ? "sampled" : "composed") +
                         "/only-" + only,
                     regime,
                     {noise_fn_from_name(only)},
                     false});
  } else {
    cells.push_back({"no-noise", Regime::SAMPLED, {}, true});
    for (Regime regime : {Regime::SAMPLED, Regime::COMPOSED}) {
      if (!regime_flag.empty() && regime != regime_from_name(regime_flag)) continue;
      std::string r = regime == Regime::SAMPLED ? "sampled" : "composed";
      std::vector<NoiseFn> all(kAllNoiseFns.begin(), kAllNoiseFns.end());
      cells.push_back({r + "/all", regime, all, false});
      for (NoiseFn f : kAllNoiseFns) {
        cells.push_back({r + "/only-" + noise_fn_name(f), regime, {f}, false});
        std::vector<NoiseFn> rest;
        for (NoiseFn g : kAllNoiseFns) {
          if (g != f) rest.push_back(g);
        }
        cells.push_back({r + "/all-but-" + noise_fn_name(f), regime, rest, false});
      }
    }
  }

  std::cout << "cell\tg2t_bleu\tt2g_f1\n";
  for (const auto& cell : cells) {
    auto res = run_cell(cfg, d, cell.regime, cell.enabled, cell.no_noise);
    std::cout << cell.name << "\t" << res.bleu << "\t" << res.f1 << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"knowledge-graph <-> text conversion toolkit"};
  app.require_subcommand(1);

  // build-data
  auto* bd = app.add_subcommand("build-data", "build JSONL splits from a raw dataset");
  std::string bd_dataset, bd_raw, bd_out = ".";
  bool bd_ball = false;
  std::uint64_t bd_seed = 0;
  std::size_t bd_synth_n = 500;
  bd->add_option("--dataset", bd_dataset, "webnlg, vg or synth")->required();
  bd->add_option("--raw", bd_raw, "raw dataset directory or file (webnlg/vg)");
  bd->add_option("--out", bd_out, "output directory");
  bd->add_flag("--ball-subset", bd_ball, "restrict VG to images mentioning balls");
  bd->add_option("--seed", bd_seed, "split / generation seed");
  bd->add_option("--n", bd_synth_n, "synthetic corpus size");

  // shared config plumbing for train / select / ablate
  auto add_run_options = [](CLI::App* sub, std::string& config_path, RunConfig& cfg) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--train", cfg.train_path, "train JSONL");
    sub->add_option("--val", cfg.val_path, "val JSONL");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--embed", cfg.dims.embed, "embedding size");
    sub->add_option("--hidden", cfg.dims.hidden, "hidden size");
    sub->add_option("--dropout", cfg.dims.dropout, "dropout rate");
    sub->add_option("--lr", cfg.train.lr, "learning rate");
    sub->add_option("--max-epochs", cfg.train.max_epochs, "supervised epoch cap");
    sub->add_option("--iterations", cfg.train.max_unsup_iterations,
                    "backtranslation iterations");
    sub->add_option("--vocab-max", cfg.vocab_max, "vocabulary size cap (0 = unlimited)");
  };

  auto* tr = app.add_subcommand("train", "train a model");
  std::string tr_config, tr_regime, tr_only, tr_exclude;
  bool tr_no_noise = false;
  RunConfig tr_cfg;
  add_run_options(tr, tr_config, tr_cfg);
  tr->add_option("--mode", tr_cfg.mode, "supervised or unsupervised");
  tr->add_option("--regime", tr_regime, "sampled or composed");
  tr->add_option("--noise-only", tr_only, "enable a single noise function");
  tr->add_option("--noise-exclude", tr_exclude, "disable one noise function");
  tr->add_flag("--no-noise", tr_no_noise, "identity corruption (ablation)");

  auto* cv = app.add_subcommand("convert", "convert between graphs and text over JSONL");
  std::string cv_mode, cv_in, cv_out, cv_ckpt;
  cv->add_option("--mode", cv_mode, "rule-g2t, rule-t2g, model-g2t or model-t2g")->required();
  cv->add_option("--in", cv_in, "input JSONL")->required();
  cv->add_option("--out", cv_out, "output JSONL")->required();
  cv->add_option("--checkpoint", cv_ckpt, "model checkpoint (model modes)");

  auto* ev = app.add_subcommand("evaluate", "score predictions against references");
  std::string ev_task, ev_hyp, ev_ref;
  ev->add_option("--task", ev_task, "g2t or t2g")->required();
  ev->add_option("--hyp", ev_hyp, "hypothesis JSONL (from convert)")->required();
  ev->add_option("--ref", ev_ref, "reference JSONL")->required();

  auto* se = app.add_subcommand("select", "score checkpoints and pick the best");
  std::string se_config, se_dir, se_criterion = "m_unsup";
  RunConfig se_cfg;
  add_run_options(se, se_config, se_cfg);
  se->add_option("--checkpoints", se_dir, "checkpoint directory")->required();
  se->add_option("--criterion", se_criterion, "m_unsup, m_val_bleu or m_val_f1");

  auto* ab = app.add_subcommand("ablate", "run the noise-ablation grid");
  std::string ab_config, ab_regime, ab_only;
  bool ab_no_noise = false;
  RunConfig ab_cfg;
  add_run_options(ab, ab_config, ab_cfg);
  ab->add_option("--regime", ab_regime, "restrict to one regime");
  ab->add_option("--only", ab_only, "run the single only-<fn> cell");
  ab->add_flag("--no-noise", ab_no_noise, "run the single no-noise cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kOk : kConfigError;
  }

  try {
    if (*bd) {
      if (bd_dataset != "synth" && bd_raw.empty()) throw ConfigError("--raw is required");
      return cmd_build_data(bd_dataset, bd_raw, bd_out, bd_ball, bd_seed, bd_synth_n);
    }
    if (*tr) {
      if (!tr_config.empty()) {
        RunConfig from_file;
        from_file.load_file(tr_config);
        // flags override the file: re-parse on top of the file values
        from_file.mode = tr->count("--mode") ? tr_cfg.mode : from_file.mode;
        auto take = [&](const char* flag, auto& dst, const auto& src) {
          if (tr->count(flag)) dst = src;
        };
        take("--train", from_file.train_path, tr_cfg.train_path);
        take("--val", from_file.val_path, tr_cfg.val_path);
        take("--out", from_file.out_dir, tr_cfg.out_dir);
        take("--seed", from_file.seed, tr_cfg.seed);
        take("--embed", from_file.dims.embed, tr_cfg.dims.embed);
        take("--hidden", from_file.dims.hidden, tr_cfg.dims.hidden);
        take("--dropout", from_file.dims.dropout, tr_cfg.dims.dropout);
        take("--lr", from_file.train.lr, tr_cfg.train.lr);
        take("--max-epochs", from_file.train.max_epochs, tr_cfg.train.max_epochs);
        take("--iterations", from_file.train.max_unsup_iterations,
             tr_cfg.train.max_unsup_iterations);
        take("--vocab-max", from_file.vocab_max, tr_cfg.vocab_max);
        tr_cfg = from_file;
      }
      if (!tr_regime.empty()) tr_cfg.train.regime = regime_from_name(tr_regime);
      if (tr_no_noise) tr_cfg.no_noise = true;
      tr_cfg.apply_noise_flags(tr_only, tr_exclude);
      return cmd_train(tr_cfg);
    }
    if (*cv) return cmd_convert(cv_mode, cv_in, cv_out, cv_ckpt);
    if (*ev) return cmd_evaluate(ev_task, ev_hyp, ev_ref);
    if (*se) {
      if (!se_config.empty()) se_cfg.load_file(se_config);
      return cmd_select(se_dir, se_criterion, se_cfg);
    }
    if (*ab) {
      if (!ab_config.empty()) ab_cfg.load_file(ab_config);
      return cmd_ablate(ab_cfg, ab_regime, ab_only, ab_no_noise);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NonFiniteGradient& e) {
    std::cerr << "training aborted: " << e.what() << "\n";
    return kTrainingAborted;
  } catch (const MissingFile& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const MalformedRecord& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kConfigError;
}
