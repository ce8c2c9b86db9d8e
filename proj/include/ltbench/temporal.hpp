#pragma once

// First-order Markov process over the tunnel inputs with randomized
// single-node hard interventions at each step.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"
#include "ltbench/factors.hpp"
#include "ltbench/rng.hpp"

namespace lt {

using TemporalState = FactorVector;

struct TemporalSpec {
  TemporalState initial = {128.0, 128.0, 128.0, 0.0, 0.0};
  /// Innovations are uniform on [-h, h] per factor.
  std::array<double, kNumFactors> innovation_halfwidth = {50.0, 50.0, 50.0, 10.0, 5.0};
  double p_no_intervention = 0.3;
  std::size_t length = 100000;
  /// Train / validation / test lengths, taken sequentially. Must sum to length.
  std::array<std::size_t, 3> split = {80000, 10000, 10000};
  /// Size of the additional iid-uniform evaluation set.
  std::size_t eval_samples = 1000;
  std::uint64_t seed = 0;

  /// Scales the 80/10/10 split to `n` steps.
  static TemporalSpec with_length(std::size_t n, std::uint64_t seed);
};

void validate_temporal(const TemporalSpec& spec);

/// Reflection into [0, 255]: -x below 0, 510 - x at or above 255.
double reflect_brightness(double x) noexcept;
/// Reflection into [-90, 90]: -180 - x below -90, 180 - x at or above 90.
double reflect_angle(double x) noexcept;
/// Repeats the reflection until the value is in range. Agrees with a single
/// reflection on [-255, 510] and [-270, 270] respectively.
double fold_brightness(double x);
double fold_angle(double x);

/// +1 if blue > red, -1 otherwise (ties included).
int polarizer_sign(double red, double blue) noexcept;

struct Intervention {
  std::size_t target = 0;
  double value = 0.0;
};

using Innovations = std::array<double, kNumFactors>;

/// Deterministic transition given the innovations. Throws OutOfBounds when
/// `state` (or the intervention value) lies outside the valid ranges.
TemporalState step_temporal(const TemporalState& state, const Innovations& eps,
                            const std::optional<Intervention>& intervention);

/// Random draws of one step: innovations and the optional intervention.
struct StepDraw {
  Innovations eps{};
  std::optional<Intervention> intervention;
};

/// Draws step `t` from its own counter stream.
StepDraw draw_step(const TemporalSpec& spec, std::size_t t);

/// Transition with freshly drawn innovations; `intervention` overrides the
/// target after the update.
TemporalState step_temporal(const TemporalState& state, const std::optional<Intervention>& intervention,
                            CounterRng& rng, const TemporalSpec& spec);

struct TemporalTrace {
  std::vector<TemporalState> states;
  /// Intervention that produced `states[t]`; none for t = 0.
  std::vector<std::optional<Intervention>> interventions;
};

/// Runs the process for `spec.length` steps from `spec.initial`. Row 0 is the
/// initial state, row t the result of step t.
TemporalTrace run_temporal(const TemporalSpec& spec);

/// Factor row drawn uniformly from the valid ranges (evaluation set).
FactorVector sample_uniform_factors(std::uint64_t seed, std::size_t row);

/// Whether every factor is inside its valid range.
bool in_bounds(const FactorVector& v) noexcept;

nlohmann::json temporal_to_json(const TemporalSpec& spec);
TemporalSpec temporal_from_json(const nlohmann::json& j);

}  // namespace lt
