#include "rtnet/model/latent.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "rtnet/substrate/error.hpp"

namespace rtnet::model {

const ActGaussian& LatentSpec::find(const std::string& act) const {
  for (const auto& a : acts) {
    if (a.act == act) return a;
  }
  throw ContractError("latent spec: unknown act '" + act + "'");
}

bool LatentSpec::contains(const std::string& act) const {
  for (const auto& a : acts) {
    if (a.act == act) return true;
  }
  return false;
}

LatentFit fit_latent_spec(const std::vector<LabeledLatent>& samples) {
  LatentFit fit;
  std::vector<std::string> order;
  std::map<std::string, std::vector<const std::vector<double>*>> groups;
  for (const auto& s : samples) {
    require(!s.z.empty(), "fit_latent_spec: empty latent vector");
    if (fit.spec.latent_dim == 0) fit.spec.latent_dim = s.z.size();
    require(s.z.size() == fit.spec.latent_dim, "fit_latent_spec: inconsistent latent widths");
    if (!groups.count(s.act)) order.push_back(s.act);
    groups[s.act].push_back(&s.z);
  }
  const std::size_t nz = fit.spec.latent_dim;
  for (const auto& act : order) {
    const auto& g = groups[act];
    if (g.size() < 2) {
      fit.skipped.push_back(act);
      continue;
    }
    ActGaussian a;
    a.act = act;
    a.samples = g.size();
    a.mean.assign(nz, 0.0);
    a.stddev.assign(nz, 0.0);
    for (const auto* z : g) {
      for (std::size_t i = 0; i < nz; ++i) a.mean[i] += (*z)[i];
    }
    for (auto& m : a.mean) m /= static_cast<double>(g.size());
    for (const auto* z : g) {
      for (std::size_t i = 0; i < nz; ++i) {
        const double d = (*z)[i] - a.mean[i];
        a.stddev[i] += d * d;
      }
    }
    for (auto& s : a.stddev) s = std::sqrt(s / static_cast<double>(g.size()));
    fit.spec.acts.push_back(std::move(a));
  }
  return fit;
}

std::vector<double> latent_vector(const LatentSpec& spec, const std::string& act, RngStream& rng,
                                  LatentMode mode) {
  const auto& a = spec.find(act);
  std::vector<double> z = a.mean;
  if (mode == LatentMode::sample) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += a.stddev[i] * rng.normal();
  }
  return z;
}

ActGaussian interpolate(const LatentSpec& spec, const std::string& act_a, const std::string& act_b,
                        double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "interpolate: alpha must lie in [0, 1]");
  const auto& a = spec.find(act_a);
  const auto& b = spec.find(act_b);
  ActGaussian out;
  out.act = act_a + "~" + act_b;
  out.mean.resize(a.mean.size());
  out.stddev.resize(a.mean.size());
  for (std::size_t i = 0; i < a.mean.size(); ++i) {
    out.mean[i] = alpha == 0.0 ? a.mean[i] : (1.0 - alpha) * a.mean[i] + alpha * b.mean[i];
    out.stddev[i] = alpha == 0.0 ? a.stddev[i] : (1.0 - alpha) * a.stddev[i] + alpha * b.stddev[i];
  }
  return out;
}

std::string latent_spec_to_text(const LatentSpec& spec) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# act\tsamples\tmean[" << spec.latent_dim << "]\tstd[" << spec.latent_dim << "]\n";
  for (const auto& a : spec.acts) {
    os << a.act << '\t' << a.samples;
    for (double v : a.mean) os << '\t' << v;
    for (double v : a.stddev) os << '\t' << v;
    os << '\n';
  }
  return os.str();
}

LatentSpec latent_spec_from_text(const std::string& text) {
  LatentSpec spec;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> fields;
    std::string f;
    while (std::getline(ls, f, '\t')) fields.push_back(f);
    if (fields.size() < 4 || (fields.size() - 2) % 2 != 0) {
      throw FormatError("latent spec line " + std::to_string(line_no) + ": malformed");
    }
    const std::size_t nz = (fields.size() - 2) / 2;
    if (spec.latent_dim == 0) spec.latent_dim = nz;
    if (nz != spec.latent_dim) {
      throw FormatError("latent spec line " + std::to_string(line_no) + ": inconsistent width");
    }
    ActGaussian a;
    a.act = fields[0];
    try {
      a.samples = std::stoull(fields[1]);
      for (std::size_t i = 0; i < nz; ++i) a.mean.push_back(std::stod(fields[2 + i]));
      for (std::size_t i = 0; i < nz; ++i) a.stddev.push_back(std::stod(fields[2 + nz + i]));
    } catch (const std::logic_error&) {
      throw FormatError("latent spec line " + std::to_string(line_no) + ": bad number");
    }
    spec.acts.push_back(std::move(a));
  }
  return spec;
}

}  // namespace rtnet::model
