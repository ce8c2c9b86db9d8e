#include "ltbench/scm.hpp"

#include <algorithm>
#include <cmath>

#include "ltbench/errors.hpp"
#include "ltbench/rng.hpp"

namespace lt {

double AffineMap::apply(double z) const noexcept { return std::clamp(scale * z + offset, lo, hi); }

std::array<AffineMap, kNumFactors> ScmSpec::default_device_map() {
  return {AffineMap{50.0, 127.5, 0.0, 255.0}, AffineMap{50.0, 127.5, 0.0, 255.0}, AffineMap{50.0, 127.5, 0.0, 255.0},
          AffineMap{30.0, 0.0, -90.0, 90.0}, AffineMap{30.0, 0.0, -90.0, 90.0}};
}

Adjacency ScmSpec::placeholder_graph() {
  Adjacency a = Adjacency::Zero();
  a(kRed, kGreen) = 1.0;
  a(kGreen, kBlue) = 1.0;
  a(kTheta1, kTheta2) = 1.0;
  a(kRed, kTheta2) = 1.0;
  return a;
}

ScmSpec ScmSpec::with_graph(const Adjacency& adjacency, std::uint64_t seed) {
  ScmSpec s;
  s.adjacency = adjacency;
  s.seed = seed;
  CounterRng rng(seed, streams::kScmParameters);
  for (auto& v : s.noise_variance) v = rng.uniform(0.01, 0.02);
  for (auto& h : s.shift) h = rng.uniform(1.0, 2.0);
  return s;
}

std::vector<std::size_t> topological_order(const Adjacency& a) {
  std::array<int, kNumFactors> indegree{};
  for (std::size_t i = 0; i < kNumFactors; ++i)
    for (std::size_t j = 0; j < kNumFactors; ++j)
      if (a(i, j) != 0.0) ++indegree[j];
  std::vector<std::size_t> order;
  std::array<bool, kNumFactors> done{};
  while (order.size() < kNumFactors) {
    // Lowest-index ready node first, so the order is unique.
    std::size_t pick = kNumFactors;
    for (std::size_t k = 0; k < kNumFactors; ++k) {
      if (!done[k] && indegree[k] == 0) {
        pick = k;
        break;
      }
    }
    if (pick == kNumFactors) throw CyclicGraph("adjacency matrix contains a directed cycle");
    done[pick] = true;
    order.push_back(pick);
    for (std::size_t j = 0; j < kNumFactors; ++j)
      if (a(pick, j) != 0.0) --indegree[j];
  }
  return order;
}

void validate_scm(const ScmSpec& spec) {
  if (!spec.adjacency.allFinite()) throw RangeError("adjacency", "non-finite weight");
  topological_order(spec.adjacency);
  for (std::size_t k = 0; k < kNumFactors; ++k) {
    const auto name = std::string(kFactorNames[k]);
    if (!(spec.noise_variance[k] >= 0.01 && spec.noise_variance[k] <= 0.02)) {
      throw RangeError("noise_variance." + name, "outside [0.01, 0.02]");
    }
    if (!(spec.shift[k] >= 1.0 && spec.shift[k] <= 2.0)) throw RangeError("shift." + name, "outside [1, 2]");
    if (!(spec.device_map[k].lo <= spec.device_map[k].hi)) throw RangeError("device_map." + name, "lo > hi");
  }
  if (spec.samples_per_env == 0) throw RangeError("samples_per_env", "must be positive");
}

Environment Environment::intervene(int k) {
  if (k < 0 || k >= static_cast<int>(kNumFactors)) throw UnknownTarget("intervention target " + std::to_string(k));
  return Environment{k};
}

Environment Environment::parse(const std::string& id) {
  if (id == "obs") return observational();
  for (std::size_t k = 0; k < kNumFactors; ++k) {
    if (id == "do_" + std::string(kFactorNames[k])) return Environment{static_cast<int>(k)};
  }
  throw UnknownTarget("unknown environment '" + id + "'");
}

std::string Environment::id() const {
  return is_observational() ? "obs" : "do_" + std::string(kFactorNames[static_cast<std::size_t>(target)]);
}

std::vector<Environment> ccrl_environments() {
  std::vector<Environment> envs = {Environment::observational()};
  for (std::size_t k = 0; k < kNumFactors; ++k) envs.push_back(Environment::intervene(static_cast<int>(k)));
  return envs;
}

FactorSample sample_scm(const ScmSpec& spec, Environment env) {
  validate_scm(spec);
  if (env.target >= static_cast<int>(kNumFactors) || env.target < -1) {
    throw UnknownTarget("intervention target " + std::to_string(env.target));
  }
  const auto order = topological_order(spec.adjacency);
  const auto n = static_cast<Eigen::Index>(spec.samples_per_env);
  FactorSample out{RowMatrix(n, kNumFactors), RowMatrix(n, kNumFactors)};
  std::array<double, kNumFactors> sd{};
  for (std::size_t k = 0; k < kNumFactors; ++k) sd[k] = std::sqrt(spec.noise_variance[k]);

#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < n; ++r) {
    CounterRng rng(spec.seed, streams::kScmRows + env.index(), static_cast<std::uint64_t>(r));
    // Noise is drawn in factor order, independent of the topological order.
    std::array<double, kNumFactors> noise{};
    for (std::size_t k = 0; k < kNumFactors; ++k) noise[k] = sd[k] * rng.normal();
    std::array<double, kNumFactors> z{};
    for (std::size_t j : order) {
      double v = noise[j];
      for (std::size_t i = 0; i < kNumFactors; ++i) v += spec.adjacency(i, j) * z[i];
      if (env.target == static_cast<int>(j)) v += spec.shift[j];
      z[j] = v;
    }
    for (std::size_t k = 0; k < kNumFactors; ++k) {
      out.latent(r, static_cast<Eigen::Index>(k)) = z[k];
      out.device(r, static_cast<Eigen::Index>(k)) = spec.device_map[k].apply(z[k]);
    }
  }
  return out;
}

nlohmann::json scm_to_json(const ScmSpec& spec) {
  nlohmann::json adj = nlohmann::json::array();
  for (int i = 0; i < 5; ++i) {
    std::vector<double> row(5);
    for (int j = 0; j < 5; ++j) row[j] = spec.adjacency(i, j);
    adj.push_back(row);
  }
  nlohmann::json maps = nlohmann::json::array();
  for (const auto& m : spec.device_map) maps.push_back({{"scale", m.scale}, {"offset", m.offset}, {"lo", m.lo}, {"hi", m.hi}});
  return {{"variables", kFactorNames},         {"adjacency", adj},
          {"noise_variance", spec.noise_variance}, {"shift", spec.shift},
          {"samples_per_env", spec.samples_per_env}, {"device_map", maps},
          {"seed", spec.seed}};
}

ScmSpec scm_from_json(const nlohmann::json& j) {
  try {
    const std::uint64_t seed = j.value("seed", std::uint64_t{0});
    Adjacency adj = ScmSpec::placeholder_graph();
    if (j.contains("adjacency")) {
      const auto& a = j.at("adjacency");
      if (a.size() != 5) throw RangeError("adjacency", "must be 5x5");
      for (int r = 0; r < 5; ++r) {
        if (a.at(r).size() != 5) throw RangeError("adjacency", "must be 5x5");
        for (int c = 0; c < 5; ++c) adj(r, c) = a.at(r).at(c).get<double>();
      }
    }
    ScmSpec spec = ScmSpec::with_graph(adj, seed);
    if (j.contains("noise_variance")) spec.noise_variance = j.at("noise_variance").get<std::array<double, 5>>();
    if (j.contains("shift")) spec.shift = j.at("shift").get<std::array<double, 5>>();
    spec.samples_per_env = j.value("samples_per_env", spec.samples_per_env);
    if (j.contains("device_map")) {
      const auto& maps = j.at("device_map");
      if (maps.size() != 5) throw RangeError("device_map", "needs 5 entries");
      for (std::size_t k = 0; k < 5; ++k) {
        auto& m = spec.device_map[k];
        m.scale = maps.at(k).value("scale", m.scale);
        m.offset = maps.at(k).value("offset", m.offset);
        m.lo = maps.at(k).value("lo", m.lo);
        m.hi = maps.at(k).value("hi", m.hi);
      }
    }
    validate_scm(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw RangeError("scm", std::string("malformed SCM document: ") + e.what());
  }
}

}  // namespace lt
