#pragma once

// Linear-Gaussian structural causal model over (R, G, B, theta1, theta2) with
// single-node shift interventions.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "ltbench/factors.hpp"
#include "ltbench/matrix.hpp"

namespace lt {

using Adjacency = Eigen::Matrix<double, 5, 5>;

/// Latent-to-device map: clamp(scale * z + offset, lo, hi).
struct AffineMap {
  double scale = 1.0;
  double offset = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  double apply(double z) const noexcept;
};

struct ScmSpec {
  /// adjacency(i, j) != 0 means i -> j with that weight.
  Adjacency adjacency = Adjacency::Zero();
  std::array<double, kNumFactors> noise_variance = {0.015, 0.015, 0.015, 0.015, 0.015};
  std::array<double, kNumFactors> shift = {1.5, 1.5, 1.5, 1.5, 1.5};
  std::size_t samples_per_env = 10000;
  std::array<AffineMap, kNumFactors> device_map = default_device_map();
  std::uint64_t seed = 0;

  static std::array<AffineMap, kNumFactors> default_device_map();

  /// Draws noise variances from U[0.01, 0.02] and shifts from U[1, 2] using
  /// `seed`.
  static ScmSpec with_graph(const Adjacency& adjacency, std::uint64_t seed);

  /// Example graph R->G, G->B, theta1->theta2, R->theta2 with unit weights.
  /// A placeholder for configuration, not the benchmark's published graph.
  static Adjacency placeholder_graph();
};

/// Throws CyclicGraph, or RangeError for variances / shifts outside their ranges.
void validate_scm(const ScmSpec& spec);

/// Topological order of the graph; throws CyclicGraph.
std::vector<std::size_t> topological_order(const Adjacency& adjacency);

/// Observational (target < 0) or single-node shift intervention.
struct Environment {
  int target = -1;

  static Environment observational() { return {}; }
  static Environment intervene(int k);
  /// Parses "obs", "do_R", "do_G", "do_B", "do_theta1", "do_theta2".
  static Environment parse(const std::string& id);

  bool is_observational() const noexcept { return target < 0; }
  /// Stable index: 0 for obs, target + 1 otherwise.
  std::size_t index() const noexcept { return static_cast<std::size_t>(target + 1); }
  std::string id() const;
};

/// The observational environment followed by one intervention per factor.
std::vector<Environment> ccrl_environments();

struct FactorSample {
  RowMatrix latent;  // n x 5
  RowMatrix device;  // n x 5, after the affine map and clamp
};

/// Ancestral sampling of `spec.samples_per_env` rows. Row r of environment e
/// uses its own counter stream keyed by (seed, e, r).
FactorSample sample_scm(const ScmSpec& spec, Environment env);

nlohmann::json scm_to_json(const ScmSpec& spec);
/// Missing `noise_variance` / `shift` entries are drawn from `seed`.
ScmSpec scm_from_json(const nlohmann::json& j);

}  // namespace lt
