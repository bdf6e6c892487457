#include "rtnet/cli/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rtnet/corpus/corpus_io.hpp"
#include "rtnet/corpus/synth.hpp"
#include "rtnet/eval/evaluate.hpp"
#include "rtnet/eval/metrics.hpp"
#include "rtnet/eval/sampling.hpp"
#include "rtnet/features/dataset.hpp"
#include "rtnet/model/gradcheck_suite.hpp"
#include "rtnet/model/latent.hpp"
#include "rtnet/model/trainer.hpp"
#include "rtnet/substrate/error.hpp"
#include "rtnet/substrate/kernels.hpp"

namespace rtnet::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string data_dir;
  std::string kernels = "auto";
  bool quiet = false;
};

fs::path resolve(const Globals& g, const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !g.data_dir.empty()) return fs::path(g.data_dir) / path;
  return path;
}

fs::path existing(const Globals& g, const std::string& p, const std::string& flag) {
  const auto r = resolve(g, p);
  if (!fs::exists(r)) throw UserError(flag + ": no such file or directory: " + r.string());
  return r;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw FormatError("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// One '#' line carrying the producing command, its seed, and its configs.
std::string header_line(const json& j) { return "# " + j.dump() + "\n"; }

json model_header(const std::string& command, std::uint64_t seed, const model::TrainedModel& m) {
  return {{"command", command},
          {"seed", seed},
          {"model", model::to_json(m.model_config)},
          {"train", model::to_json(m.train_config)}};
}

corpus::ActSpec parse_act(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() != 3 || parts[0].empty()) {
    throw UserError("--act: expected name:mean_ms:std_ms, got '" + text + "'");
  }
  try {
    return {parts[0], std::stod(parts[1]), std::stod(parts[2])};
  } catch (const std::logic_error&) {
    throw UserError("--act: bad number in '" + text + "'");
  }
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  corpus::SynthConfig cfg;
  std::vector<std::string> acts{"early:-100:150", "late:400:150"};
  std::string out;
};

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* c = app.add_subcommand("synth", "Generate a synthetic two-speaker corpus with known act offsets");
  c->add_option("--out", a.out, "Output corpus directory")->required();
  c->add_option("--pairs", a.cfg.pairs, "Number of turn pairs")->capture_default_str();
  c->add_option("--act", a.acts, "Act as name:mean_ms:std_ms (repeat for each act)")->capture_default_str();
  c->add_option("--acoustic-dim", a.cfg.acoustic_dim, "Acoustic feature width")->capture_default_str();
  c->add_option("--final-min", a.cfg.final_ipu_min_frames, "Shortest turn-final IPU in frames")
      ->capture_default_str();
  c->add_option("--final-max", a.cfg.final_ipu_max_frames, "Longest turn-final IPU in frames")
      ->capture_default_str();
  c->add_option("--ramp", a.cfg.ramp_frames, "Frames of end-of-turn cue ramp")->capture_default_str();
  c->add_option("--noise", a.cfg.noise_std, "Acoustic noise standard deviation")->capture_default_str();
  c->add_option("--seed", a.cfg.seed, "Generator seed")->capture_default_str();
}

int run_synth(const Globals& g, SynthArgs& a, std::ostream& out) {
  a.cfg.acts.clear();
  for (const auto& s : a.acts) a.cfg.acts.push_back(parse_act(s));
  a.cfg.validate();
  const auto corp = corpus::to_corpus(corpus::generate_synthetic_corpus(a.cfg));
  const auto dir = resolve(g, a.out);
  corpus::write_corpus(dir.string(), corp);
  out << "wrote " << corp.conversations.size() << " conversations to " << dir.string() << "\n";
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  model::ModelConfig mc;
  model::TrainConfig tc;
  std::string variant = "rtnet";
  std::string encoder = "full";
  std::string user_features = "both";
  std::string vae_heads = "sigma-relu";
  std::string schedule;
  std::string corpus;
  std::string out;
  std::string log;
  std::size_t log_every = 100;
};

void add_train(CLI::App& app, TrainArgs& a) {
  auto* c = app.add_subcommand("train", "Train a model and write a checkpoint plus a loss log");
  c->add_option("--corpus", a.corpus, "Corpus directory")->required();
  c->add_option("--out", a.out, "Checkpoint path")->required();
  c->add_option("--log", a.log, "Loss log path (default: <out>.log.tsv)");
  c->add_option("--log-every", a.log_every, "Progress line every N iterations (0: silent)")
      ->capture_default_str();
  c->add_option("--variant", a.variant, "Model variant")
      ->check(CLI::IsMember({"rtnet", "rtnet-vae"}))
      ->capture_default_str();
  c->add_option("--encoder", a.encoder, "Response encoder ablation")
      ->check(CLI::IsMember({"full", "acoustic", "linguistic", "none"}))
      ->capture_default_str();
  c->add_option("--user-features", a.user_features, "User features fed to the inference network")
      ->check(CLI::IsMember({"both", "acoustic", "linguistic"}))
      ->capture_default_str();
  c->add_option("--embedding-dim", a.mc.embedding_dim, "Word embedding width")->capture_default_str();
  c->add_option("--acoustic-hidden", a.mc.acoustic_hidden, "Acoustic Bi-LSTM width per direction")
      ->capture_default_str();
  c->add_option("--linguistic-hidden", a.mc.linguistic_hidden, "Linguistic Bi-LSTM width per direction")
      ->capture_default_str();
  c->add_option("--master-hidden", a.mc.master_hidden, "Master Bi-LSTM width per direction")
      ->capture_default_str();
  c->add_option("--hz-dim", a.mc.hz_dim, "Width of the response encoding h_z")->capture_default_str();
  c->add_option("--vae-reduce", a.mc.vae_reduce, "VAE reduction layer width")->capture_default_str();
  c->add_option("--latent-dim", a.mc.latent_dim, "VAE latent width")->capture_default_str();
  c->add_option("--vae-heads", a.vae_heads, "Activation on the VAE mu and sigma_hat heads")
      ->check(CLI::IsMember({"linear", "relu", "sigma-relu"}))
      ->capture_default_str();
  c->add_option("--inference-hidden", a.mc.inference_hidden, "Inference LSTM width")->capture_default_str();
  c->add_option("--batch-size", a.tc.batch_size, "Turn pairs per batch")->capture_default_str();
  c->add_option("--iterations", a.tc.iterations, "Training iterations")->capture_default_str();
  c->add_option("--lr", a.tc.learning_rate, "Adam learning rate")->capture_default_str();
  c->add_option("--l2", a.tc.l2, "L2 weight decay")->capture_default_str();
  c->add_option("--schedule", a.schedule, "Learning-rate factors as iteration:factor,...");
  c->add_option("--w-kl", a.tc.w_kl, "KL weight (VAE only)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  c->add_option("--max-vocab", a.tc.max_vocab, "Embedding rows after vocabulary merging")
      ->capture_default_str();
  c->add_option("--test-every", a.tc.test_every, "Every Nth conversation is held out (0: none)")
      ->capture_default_str();
  c->add_option("--seed", a.tc.seed, "Initialization and batching seed")->capture_default_str();
}

int run_train(const Globals& g, TrainArgs& a, std::ostream& out, std::ostream& err) {
  a.mc.variant = model::parse_variant(a.variant);
  a.mc.encoder_mode = model::parse_encoder_mode(a.encoder);
  a.mc.user_features = model::parse_user_features(a.user_features);
  a.mc.vae_heads = model::parse_vae_heads(a.vae_heads);
  a.tc.schedule = model::parse_schedule(a.schedule);
  a.tc.validate();

  const auto corpus_dir = existing(g, a.corpus, "--corpus");
  const auto corp = corpus::read_corpus(corpus_dir.string());
  features::DatasetOptions opts;
  opts.test_every = a.tc.test_every;
  opts.max_vocab = a.tc.max_vocab;
  opts.seed = a.tc.seed;
  const auto ds = features::build_dataset(corp, opts);
  if (!g.quiet) {
    err << "train pairs " << ds.train.size() << ", test pairs " << ds.test.size() << ", vocabulary "
        << ds.vocab.size() << "\n";
  }
  auto result = model::train_model(ds, a.mc, a.tc, [&](const model::TrainLogEntry& e) {
    if (!g.quiet && a.log_every > 0 && (e.iteration % a.log_every == 0 || e.iteration + 1 == a.tc.iterations)) {
      err << "iteration " << e.iteration << " bce " << std::setprecision(5) << e.bce << " kl " << e.kl
          << "\n";
    }
  });
  result.model.provenance["corpus"] = corp.meta;

  const auto ckpt = resolve(g, a.out);
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  model::save_model(ckpt.string(), result.model);
  const auto log_path = a.log.empty() ? fs::path(ckpt.string() + ".log.tsv") : resolve(g, a.log);
  write_text(log_path, header_line(model_header("train", a.tc.seed, result.model)) +
                           model::format_train_log(result.log));
  out << "wrote " << ckpt.string() << " and " << log_path.string() << "\n";
  return kExitOk;
}

// ---- commands that apply a checkpoint to a corpus ------------------------------

struct ModelArgs {
  std::string ckpt;
  std::string corpus;
  std::string split = "test";
};

void add_model_inputs(CLI::App* c, ModelArgs& m) {
  c->add_option("--ckpt", m.ckpt, "Checkpoint written by train")->required();
  c->add_option("--corpus", m.corpus, "Corpus directory")->required();
  c->add_option("--split", m.split, "Pairs to use")
      ->check(CLI::IsMember({"train", "test"}))
      ->capture_default_str();
}

struct Loaded {
  model::TrainedModel model;
  features::Dataset data;
  const std::vector<features::PairExample>& pairs(const std::string& split) const {
    return split == "train" ? data.train : data.test;
  }
};

// The dataset is rebuilt with the checkpoint's vocabulary, act inventory and
// split, so pair indices line up with training.
Loaded load(const Globals& g, const ModelArgs& m) {
  Loaded l;
  l.model = model::load_model(existing(g, m.ckpt, "--ckpt").string());
  const auto corp = corpus::read_corpus(existing(g, m.corpus, "--corpus").string());
  features::DatasetOptions opts;
  opts.test_every = l.model.train_config.test_every;
  opts.max_vocab = l.model.train_config.max_vocab;
  opts.seed = l.model.train_config.seed;
  l.data = features::build_dataset(corp, opts, &l.model.vocab, &l.model.act_names);
  if (l.data.acoustic_dim != l.model.model_config.acoustic_dim) {
    throw UserError("--corpus: acoustic width " + std::to_string(l.data.acoustic_dim) +
                    " does not match the checkpoint's " + std::to_string(l.model.model_config.acoustic_dim));
  }
  if (l.pairs(m.split).empty()) throw UserError("--split " + m.split + ": no turn pairs");
  return l;
}

std::string act_label(const std::vector<std::string>& names, int act) {
  return act >= 0 && static_cast<std::size_t>(act) < names.size() ? names[static_cast<std::size_t>(act)]
                                                                   : "untagged";
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  ModelArgs m;
  std::size_t runs = 3;
  std::uint64_t seed = 1;
  std::string out;
  std::string csv;
};

void add_evaluate(CLI::App& app, EvaluateArgs& a) {
  auto* c = app.add_subcommand("evaluate", "Losses, MAE, baseline, per-act histograms and distances");
  add_model_inputs(c, a.m);
  c->add_option("--runs", a.runs, "Sampling passes over the pairs for MAE")->capture_default_str();
  c->add_option("--seed", a.seed, "Sampling seed")->capture_default_str();
  c->add_option("--out", a.out, "Report path (default: stdout)");
  c->add_option("--csv", a.csv, "Histogram table path");
}

int run_evaluate(const Globals& g, const EvaluateArgs& a, std::ostream& out) {
  if (a.runs == 0) throw UserError("--runs: must be at least 1");
  const auto l = load(g, a.m);
  auto report = eval::evaluation_report(l.model, l.pairs(a.m.split), {a.runs, a.seed});
  report["command"] = "evaluate";
  report["split"] = a.m.split;
  const std::string text = report.dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    write_text(resolve(g, a.out), text);
  }
  if (!a.csv.empty()) {
    write_text(resolve(g, a.csv), header_line(model_header("evaluate", a.seed, l.model)) +
                                      eval::histograms_to_csv(report));
  }
  return kExitOk;
}

// ---- sample ----------------------------------------------------------------

struct SampleArgs {
  ModelArgs m;
  std::size_t runs = 1;
  std::uint64_t seed = 1;
  std::string out;
  std::string hist;
  std::string latent_spec;
  std::string act;
  std::string latent_mode = "mean";
};

void add_sample(CLI::App& app, SampleArgs& a) {
  auto* c = app.add_subcommand("sample", "Sample response offsets and write them with per-act histograms");
  add_model_inputs(c, a.m);
  c->add_option("--runs", a.runs, "Samples per pair")->capture_default_str();
  c->add_option("--seed", a.seed, "Sampling seed")->capture_default_str();
  c->add_option("--out", a.out, "Offset table path")->required();
  c->add_option("--hist", a.hist, "Per-act histogram table path");
  c->add_option("--latent-spec", a.latent_spec, "Condition on an act's latent vector instead of each response");
  c->add_option("--act", a.act, "Act to take from --latent-spec");
  c->add_option("--latent-mode", a.latent_mode, "Use the act mean or one draw from its Gaussian")
      ->check(CLI::IsMember({"mean", "sample"}))
      ->capture_default_str();
}

std::string per_act_histograms(const std::vector<eval::OffsetSample>& samples,
                               const std::vector<std::string>& names) {
  std::vector<int> acts;
  for (const auto& s : samples) {
    if (std::find(acts.begin(), acts.end(), s.act) == acts.end()) acts.push_back(s.act);
  }
  std::sort(acts.begin(), acts.end());
  std::ostringstream os;
  os << "act,bin_center_ms,count\n";
  for (int act : acts) {
    std::vector<double> x;
    for (const auto& s : samples) {
      if (s.act == act) x.push_back(s.offset_ms);
    }
    const auto h = eval::offset_histogram(x);
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
      os << act_label(names, act) << ',' << h.center(k) << ',' << h.counts[k] << '\n';
    }
  }
  return os.str();
}

int run_sample(const Globals& g, const SampleArgs& a, std::ostream& out) {
  if (a.runs == 0) throw UserError("--runs: must be at least 1");
  if (a.latent_spec.empty() != a.act.empty()) throw UserError("--latent-spec and --act go together");
  const auto l = load(g, a.m);
  const auto& pairs = l.pairs(a.m.split);
  auto header = model_header("sample", a.seed, l.model);
  header["runs"] = a.runs;
  header["split"] = a.m.split;

  eval::ProbabilitySource source = eval::model_probabilities(*l.model.net);
  if (!a.latent_spec.empty()) {
    if (!l.model.net->is_vae()) throw UserError("--latent-spec: the checkpoint is not a VAE model");
    const auto spec = model::latent_spec_from_text(read_text(existing(g, a.latent_spec, "--latent-spec")));
    if (!spec.contains(a.act)) throw UserError("--act: '" + a.act + "' is not in the latent spec");
    RngStream rng(a.seed, 0x6c6174);
    const auto z = model::latent_vector(spec, a.act, rng,
                                        a.latent_mode == "mean" ? model::LatentMode::mean : model::LatentMode::sample);
    source = eval::latent_probabilities(*l.model.net, z);
    header["act"] = a.act;
    header["latent_mode"] = a.latent_mode;
    header["z"] = z;
  }
  const auto samples = eval::sample_offsets(pairs, source, a.runs, a.seed);
  write_text(resolve(g, a.out), header_line(header) + eval::offsets_to_tsv(samples, l.model.act_names));
  if (!a.hist.empty()) {
    write_text(resolve(g, a.hist), header_line(header) + per_act_histograms(samples, l.model.act_names));
  }
  std::vector<double> x;
  std::size_t censored = 0;
  for (const auto& s : samples) {
    x.push_back(s.offset_ms);
    censored += s.censored ? 1 : 0;
  }
  out << "samples " << samples.size() << " censored " << censored << " mean_ms " << eval::mean(x) << "\n";
  return kExitOk;
}

// ---- fit-latent -----------------------------------------------------------

struct FitArgs {
  ModelArgs m;
  std::uint64_t seed = 1;
  std::string out;
};

void add_fit(CLI::App& app, FitArgs& a) {
  auto* c = app.add_subcommand("fit-latent", "Fit a per-act Gaussian to the latent means of a VAE model");
  add_model_inputs(c, a.m);
  c->get_option("--split")->default_val("train");
  c->add_option("--seed", a.seed, "Recorded in the output; the fit itself is deterministic")
      ->capture_default_str();
  c->add_option("--out", a.out, "LatentSpec path")->required();
}

int run_fit(const Globals& g, const FitArgs& a, std::ostream& out, std::ostream& err) {
  const auto l = load(g, a.m);
  if (!l.model.net->is_vae()) throw UserError("--ckpt: fit-latent needs a VAE model");
  std::vector<model::LabeledLatent> draws;
  for (const auto& ex : l.pairs(a.m.split)) {
    if (ex.act < 0) continue;
    const auto mu = l.model.net->latent_mean(ex);
    draws.push_back({l.model.act_names[static_cast<std::size_t>(ex.act)], {mu.begin(), mu.end()}});
  }
  const auto fit = model::fit_latent_spec(draws);
  for (const auto& s : fit.skipped) err << "skipped act '" << s << "': fewer than two samples\n";
  auto header = model_header("fit-latent", a.seed, l.model);
  header["split"] = a.m.split;
  write_text(resolve(g, a.out), header_line(header) + model::latent_spec_to_text(fit.spec));
  out << "fitted " << fit.spec.acts.size() << " acts from " << draws.size() << " pairs\n";
  return kExitOk;
}

// ---- interpolate ------------------------------------------------------------

struct InterpolateArgs {
  ModelArgs m;
  std::string latent_spec;
  std::string from;
  std::string to;
  std::vector<double> alphas{0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  std::string out;
};

void add_interpolate(CLI::App& app, InterpolateArgs& a) {
  auto* c = app.add_subcommand("interpolate", "Sample offsets along the line between two act vectors");
  add_model_inputs(c, a.m);
  c->add_option("--latent-spec", a.latent_spec, "LatentSpec written by fit-latent")->required();
  c->add_option("--from", a.from, "Act at alpha = 0")->required();
  c->add_option("--to", a.to, "Act at alpha = 1")->required();
  c->add_option("--alphas", a.alphas, "Interpolation weights in [0, 1]")->delimiter(',')->capture_default_str();
  c->add_option("--samples", a.samples, "Offsets per alpha")->capture_default_str();
  c->add_option("--seed", a.seed, "Sampling seed")->capture_default_str();
  c->add_option("--out", a.out, "Offset table path")->required();
}

int run_interpolate(const Globals& g, const InterpolateArgs& a, std::ostream& out) {
  if (a.samples == 0) throw UserError("--samples: must be at least 1");
  const auto l = load(g, a.m);
  if (!l.model.net->is_vae()) throw UserError("--ckpt: interpolate needs a VAE model");
  const auto spec = model::latent_spec_from_text(read_text(existing(g, a.latent_spec, "--latent-spec")));
  for (const auto* act : {&a.from, &a.to}) {
    if (!spec.contains(*act)) throw UserError("act '" + *act + "' is not in the latent spec");
  }
  const auto& pairs = l.pairs(a.m.split);
  const std::size_t runs = (a.samples + pairs.size() - 1) / pairs.size();

  auto header = model_header("interpolate", a.seed, l.model);
  header["from"] = a.from;
  header["to"] = a.to;
  header["samples"] = a.samples;
  std::ostringstream table;
  table << header_line(header) << "alpha\tpair_id\tact\toffset_ms\tcensored\n";
  json summary = json::array();
  for (double alpha : a.alphas) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw UserError("--alphas: values must lie in [0, 1]");
    const auto z = model::interpolate(spec, a.from, a.to, alpha).mean;
    auto samples = eval::sample_offsets(pairs, eval::latent_probabilities(*l.model.net, z), runs, a.seed);
    samples.resize(a.samples);
    std::vector<double> x;
    std::size_t censored = 0;
    for (const auto& s : samples) {
      table << alpha << '\t' << s.pair_id << '\t' << act_label(l.model.act_names, s.act) << '\t' << s.offset_ms
            << '\t' << (s.censored ? 1 : 0) << '\n';
      x.push_back(s.offset_ms);
      censored += s.censored ? 1 : 0;
    }
    summary.push_back({{"alpha", alpha}, {"mean_ms", eval::mean(x)}, {"censored", censored}});
  }
  write_text(resolve(g, a.out), table.str());
  out << summary.dump(2) << "\n";
  return kExitOk;
}

// ---- gradcheck --------------------------------------------------------------

struct GradcheckArgs {
  std::uint64_t seed = 1;
  GradCheckOptions opts;
};

void add_gradcheck(CLI::App& app, GradcheckArgs& a) {
  auto* c = app.add_subcommand("gradcheck", "Finite-difference check of every trainable block (64-bit)");
  c->add_option("--seed", a.seed, "Seed for the random blocks and inputs")->capture_default_str();
  c->add_option("--eps", a.opts.eps, "Central-difference step")->capture_default_str();
  c->add_option("--tolerance", a.opts.tolerance, "Largest accepted relative error")->capture_default_str();
}

int run_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  const auto checks = model::run_gradcheck_suite(a.seed, a.opts);
  bool ok = true;
  out << "block\tentries\tmax_rel_error\tresult\n";
  for (const auto& c : checks) {
    out << c.block << '\t' << c.report.entries.size() << '\t' << std::setprecision(3) << std::scientific
        << c.report.max_rel_error << std::defaultfloat << '\t' << (c.report.pass ? "PASS" : "FAIL") << '\n';
    ok = ok && c.report.pass;
  }
  return ok ? kExitOk : kExitInternalError;
}

void apply_kernels(const Globals& g) {
  if (g.kernels == "auto") return;
  const auto isa = g.kernels == "avx2" ? kernels::Isa::avx2 : kernels::Isa::scalar;
  if (!kernels::select(isa)) throw UserError("--kernels: " + g.kernels + " is not available on this CPU");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Response timing network: synthetic corpora, training, sampling and evaluation", "rtnet"};
  app.set_config("--config", "", "Read options from a TOML/INI file ([synth], [train], ... sections)");
  app.fallthrough();
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_help_all_flag("--help-all", "Print help for every subcommand and exit");

  Globals g;
  if (const char* env = std::getenv(kDataDirEnv)) g.data_dir = env;
  app.add_option("--data-dir", g.data_dir,
                 std::string("Base directory for relative paths (default: $") + kDataDirEnv + ")");
  app.add_option("--kernels", g.kernels, "Float kernels")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
      ->capture_default_str();
  app.add_flag("--quiet", g.quiet, "No progress output");

  SynthArgs synth;
  TrainArgs train;
  EvaluateArgs evaluate;
  SampleArgs sample;
  FitArgs fit;
  InterpolateArgs interp;
  GradcheckArgs grad;
  add_synth(app, synth);
  add_train(app, train);
  add_evaluate(app, evaluate);
  add_sample(app, sample);
  add_fit(app, fit);
  add_interpolate(app, interp);
  add_gradcheck(app, grad);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUserError;
  }

  try {
    apply_kernels(g);
    const auto* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    if (name == "synth") return run_synth(g, synth, out);
    if (name == "train") return run_train(g, train, out, err);
    if (name == "evaluate") return run_evaluate(g, evaluate, out);
    if (name == "sample") return run_sample(g, sample, out);
    if (name == "fit-latent") return run_fit(g, fit, out, err);
    if (name == "interpolate") return run_interpolate(g, interp, out);
    if (name == "gradcheck") return run_gradcheck(grad, out);
    err << "error: unhandled subcommand " << name << "\n";
    return kExitInternalError;
  } catch (const UserError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace rtnet::cli
