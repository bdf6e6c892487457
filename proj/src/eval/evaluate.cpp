#include "rtnet/eval/evaluate.hpp"

#include <cmath>
#include <sstream>

#include "rtnet/substrate/error.hpp"
#include "rtnet/substrate/loss.hpp"

namespace rtnet::eval {

LossReport evaluate_losses(const model::RtNetModel<float>& net,
                           std::span<const features::PairExample> pairs) {
  require(!pairs.empty(), "evaluate_losses: no test pairs");
  LossReport r;
  for (const auto& ex : pairs) {
    typename model::RtNetModel<float>::Trace tr;
    const auto hz = net.encode(ex, {}, tr);
    const std::size_t n = static_cast<std::size_t>(ex.r_end) + 1;
    const auto probs = net.probabilities(ex, n, hz);
    double sum = 0.0;
    for (int t = ex.r_start_bound; t <= ex.r_end; ++t) {
      sum += bce_term(probs[static_cast<std::size_t>(t)], t == ex.r_end ? 1.0 : 0.0);
    }
    r.bce += sum / static_cast<double>(ex.span_length());
    if (net.is_vae()) r.kl += net.vae.kl(tr.vae);
    ++r.pairs;
  }
  r.bce /= static_cast<double>(r.pairs);
  r.kl /= static_cast<double>(r.pairs);
  return r;
}

double constant_predictor_bce(std::span<const features::PairExample> pairs, double y) {
  require(!pairs.empty(), "constant_predictor_bce: no pairs");
  double total = 0.0;
  for (const auto& ex : pairs) {
    const double len = static_cast<double>(ex.span_length());
    total += (bce_term(y, 1.0) + (len - 1.0) * bce_term(y, 0.0)) / len;
  }
  return total / static_cast<double>(pairs.size());
}

BaselineResult fixed_probability_baseline(std::span<const features::PairExample> pairs) {
  require(!pairs.empty(), "fixed_probability_baseline: no pairs");
  // Extended-precision accumulation, so the mean is the correctly rounded
  // value for small inputs (1/10 and 1/20 average to exactly 0.075).
  long double sum = 0.0L;
  for (const auto& ex : pairs) {
    require(ex.span_length() > 0, "fixed_probability_baseline: pair with an empty span R");
    sum += 1.0L / static_cast<long double>(ex.span_length());
  }
  BaselineResult b;
  b.y_fixed = static_cast<double>(sum / static_cast<long double>(pairs.size()));
  b.bce = constant_predictor_bce(pairs, b.y_fixed);
  return b;
}

MaeResult mae_from_samples(std::span<const features::PairExample> pairs,
                           const std::vector<OffsetSample>& samples, std::size_t runs) {
  require(runs > 0 && samples.size() == pairs.size() * runs,
          "mae_from_samples: expected one sample per pair and run");
  MaeResult m;
  m.per_run_s.assign(runs, 0.0);
  for (std::size_t r = 0; r < runs; ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& s = samples[r * pairs.size() + i];
      sum += std::abs(s.offset_ms - pairs[i].offset_ms()) / 1000.0;
      if (s.censored) ++m.censored;
    }
    m.per_run_s[r] = sum / static_cast<double>(pairs.size());
  }
  for (double v : m.per_run_s) m.mean_s += v;
  m.mean_s /= static_cast<double>(runs);
  m.samples = samples.size();
  return m;
}

MaeResult evaluate_mae(std::span<const features::PairExample> pairs, const ProbabilitySource& source,
                       std::size_t runs, std::uint64_t seed) {
  require(!pairs.empty(), "evaluate_mae: no test pairs");
  return mae_from_samples(pairs, sample_offsets(pairs, source, runs, seed), runs);
}

namespace {

nlohmann::json histogram_table(const OffsetHistogram& h) {
  auto rows = nlohmann::json::array();
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    if (h.counts[k] > 0) rows.push_back({h.center(k), h.counts[k]});
  }
  return rows;
}

nlohmann::json mae_json(const MaeResult& m) {
  return {{"per_run_s", m.per_run_s}, {"mean_s", m.mean_s}, {"samples", m.samples}, {"censored", m.censored}};
}

}  // namespace

nlohmann::json evaluation_report(const model::TrainedModel& m,
                                 std::span<const features::PairExample> pairs,
                                 const EvalOptions& options) {
  require(m.net != nullptr, "evaluation_report: model has no network");
  require(!pairs.empty(), "evaluation_report: no test pairs");
  const auto losses = evaluate_losses(*m.net, pairs);
  const auto baseline = fixed_probability_baseline(pairs);
  const auto samples = sample_offsets(pairs, model_probabilities(*m.net), options.runs, options.seed);
  const auto mae = mae_from_samples(pairs, samples, options.runs);
  const auto base_mae = evaluate_mae(pairs, constant_probabilities(baseline.y_fixed), options.runs, options.seed);

  nlohmann::json report;
  report["model"] = model::to_json(m.model_config);
  report["train"] = model::to_json(m.train_config);
  report["seed"] = options.seed;
  report["runs"] = options.runs;
  report["pairs"] = pairs.size();
  report["losses"] = {{"bce", losses.bce}, {"kl", losses.kl}};
  report["mae"] = mae_json(mae);
  report["baseline"] = {{"y_fixed", baseline.y_fixed}, {"bce", baseline.bce}, {"mae", mae_json(base_mae)}};

  std::vector<double> all;
  all.reserve(samples.size());
  for (const auto& s : samples) all.push_back(s.offset_ms);
  const auto cut = offset_region_cutoffs(all);
  report["cutoffs"] = {{"mode_ms", cut.mode_ms}, {"early_cutoff_ms", cut.early_cutoff_ms}, {"late_cutoff_ms", cut.late_cutoff_ms}};

  auto acts = nlohmann::json::array();
  for (std::size_t a = 0; a < m.act_names.size(); ++a) {
    std::vector<double> gen, truth;
    for (const auto& s : samples) {
      if (s.act == static_cast<int>(a)) gen.push_back(s.offset_ms);
    }
    for (const auto& ex : pairs) {
      if (ex.act == static_cast<int>(a)) truth.push_back(ex.offset_ms());
    }
    if (gen.empty() || truth.empty()) continue;
    const auto hg = offset_histogram(gen);
    const auto ht = offset_histogram(truth);
    acts.push_back({{"act", m.act_names[a]},
                    {"samples", gen.size()},
                    {"pairs", truth.size()},
                    {"generated_mean_ms", mean(gen)},
                    {"generated_mode_ms", histogram_mode(gen)},
                    {"truth_mean_ms", mean(truth)},
                    {"truth_mode_ms", histogram_mode(truth)},
                    {"ks", ks_statistic(gen, truth)},
                    {"emd_ms", earth_movers_distance(hg, ht)},
                    {"generated_histogram", histogram_table(hg)},
                    {"truth_histogram", histogram_table(ht)}});
  }
  report["acts"] = acts;
  return report;
}

std::string histograms_to_csv(const nlohmann::json& report) {
  std::ostringstream os;
  os << "act,source,bin_center_ms,count\n";
  for (const auto& a : report.at("acts")) {
    for (const char* source : {"generated", "truth"}) {
      for (const auto& row : a.at(std::string(source) + "_histogram")) {
        os << a.at("act").get<std::string>() << ',' << source << ',' << row[0].get<double>() << ','
           << row[1].get<std::size_t>() << '\n';
      }
    }
  }
  return os.str();
}

}  // namespace rtnet::eval
