#include "ltbench/temporal.hpp"

#include <cmath>
#include <sstream>

#include "ltbench/errors.hpp"

namespace lt {

TemporalSpec TemporalSpec::with_length(std::size_t n, std::uint64_t seed) {
  TemporalSpec s;
  s.length = n;
  s.seed = seed;
  const std::size_t train = n * 8 / 10;
  const std::size_t val = n / 10;
  s.split = {train, val, n - train - val};
  return s;
}

void validate_temporal(const TemporalSpec& spec) {
  if (spec.length == 0) throw RangeError("length", "must be at least 1");
  if (!(spec.p_no_intervention >= 0.0 && spec.p_no_intervention <= 1.0)) {
    throw RangeError("p_no_intervention", "must lie in [0, 1]");
  }
  if (spec.split[0] + spec.split[1] + spec.split[2] != spec.length) {
    throw RangeError("split", "train + val + test must equal length");
  }
  for (double h : spec.innovation_halfwidth) {
    if (!(h >= 0.0)) throw RangeError("innovation_halfwidth", "must be nonnegative");
  }
  if (!in_bounds(spec.initial)) throw OutOfBounds("initial state outside the valid ranges");
}

double reflect_brightness(double x) noexcept {
  if (x < 0.0) return -x;
  if (x >= 255.0) return 510.0 - x;
  return x;
}

double reflect_angle(double x) noexcept {
  if (x < -90.0) return -180.0 - x;
  if (x >= 90.0) return 180.0 - x;
  return x;
}

double fold_brightness(double x) {
  if (!std::isfinite(x)) throw OutOfBounds("non-finite brightness");
  while (x < 0.0 || x > 255.0) x = reflect_brightness(x);
  return x;
}

double fold_angle(double x) {
  if (!std::isfinite(x)) throw OutOfBounds("non-finite angle");
  while (x < -90.0 || x > 90.0) x = reflect_angle(x);
  return x;
}

int polarizer_sign(double red, double blue) noexcept { return blue > red ? 1 : -1; }

bool in_bounds(const FactorVector& v) noexcept {
  for (std::size_t k = 0; k < kNumFactors; ++k) {
    if (!(v[k] >= factor_lo(k) && v[k] <= factor_hi(k))) return false;
  }
  return true;
}

TemporalState step_temporal(const TemporalState& s, const Innovations& eps,
                            const std::optional<Intervention>& intervention) {
  if (!in_bounds(s)) {
    std::ostringstream os;
    os << "state (" << s[0] << ", " << s[1] << ", " << s[2] << ", " << s[3] << ", " << s[4]
       << ") outside [0,255]^3 x [-90,90]^2";
    throw OutOfBounds(os.str());
  }
  const double r = s[kRed], g = s[kGreen], b = s[kBlue], t1 = s[kTheta1], t2 = s[kTheta2];
  TemporalState next;
  next[kRed] = fold_brightness(r + eps[kRed]);
  next[kGreen] = fold_brightness(g + (r - g) / 2.0 + eps[kGreen]);
  next[kBlue] = fold_brightness(b + (g - b) / 4.0 + eps[kBlue]);
  next[kTheta1] = fold_angle(t1 + eps[kTheta1]);
  next[kTheta2] = fold_angle(t2 + polarizer_sign(r, b) * ((t1 - t2) / 4.0) * eps[kTheta2]);
  if (intervention) {
    const auto k = intervention->target;
    if (k >= kNumFactors) throw UnknownTarget("intervention target " + std::to_string(k));
    if (!(intervention->value >= factor_lo(k) && intervention->value <= factor_hi(k))) {
      throw OutOfBounds("intervention value outside the range of " + std::string(kFactorNames[k]));
    }
    next[k] = intervention->value;
  }
  return next;
}

namespace {

StepDraw draw_from(CounterRng& rng, const TemporalSpec& spec) {
  StepDraw d;
  for (std::size_t k = 0; k < kNumFactors; ++k) {
    const double h = spec.innovation_halfwidth[k];
    d.eps[k] = rng.uniform(-h, h);
  }
  if (rng.uniform() >= spec.p_no_intervention) {
    const auto k = static_cast<std::size_t>(rng.uniform_index(kNumFactors));
    d.intervention = Intervention{k, rng.uniform(factor_lo(k), factor_hi(k))};
  }
  return d;
}

}  // namespace

StepDraw draw_step(const TemporalSpec& spec, std::size_t t) {
  CounterRng rng(spec.seed, streams::kTemporal, t);
  return draw_from(rng, spec);
}

TemporalState step_temporal(const TemporalState& state, const std::optional<Intervention>& intervention,
                            CounterRng& rng, const TemporalSpec& spec) {
  Innovations eps{};
  for (std::size_t k = 0; k < kNumFactors; ++k) {
    const double h = spec.innovation_halfwidth[k];
    eps[k] = rng.uniform(-h, h);
  }
  return step_temporal(state, eps, intervention);
}

TemporalTrace run_temporal(const TemporalSpec& spec) {
  validate_temporal(spec);
  TemporalTrace tr;
  tr.states.reserve(spec.length);
  tr.interventions.reserve(spec.length);
  tr.states.push_back(spec.initial);
  tr.interventions.emplace_back();
  for (std::size_t t = 1; t < spec.length; ++t) {
    const auto d = draw_step(spec, t);
    tr.states.push_back(step_temporal(tr.states.back(), d.eps, d.intervention));
    tr.interventions.push_back(d.intervention);
  }
  return tr;
}

FactorVector sample_uniform_factors(std::uint64_t seed, std::size_t row) {
  CounterRng rng(seed, streams::kIidEval, row);
  FactorVector v{};
  for (std::size_t k = 0; k < kNumFactors; ++k) v[k] = rng.uniform(factor_lo(k), factor_hi(k));
  return v;
}

nlohmann::json temporal_to_json(const TemporalSpec& spec) {
  return {{"initial", spec.initial},
          {"innovation_halfwidth", spec.innovation_halfwidth},
          {"p_no_intervention", spec.p_no_intervention},
          {"length", spec.length},
          {"split", spec.split},
          {"eval_samples", spec.eval_samples},
          {"seed", spec.seed}};
}

TemporalSpec temporal_from_json(const nlohmann::json& j) {
  try {
    TemporalSpec s;
    s.seed = j.value("seed", s.seed);
    if (j.contains("length") && !j.contains("split")) {
      s = TemporalSpec::with_length(j.at("length").get<std::size_t>(), s.seed);
    }
    if (j.contains("initial")) s.initial = j.at("initial").get<TemporalState>();
    if (j.contains("innovation_halfwidth")) {
      s.innovation_halfwidth = j.at("innovation_halfwidth").get<std::array<double, 5>>();
    }
    s.p_no_intervention = j.value("p_no_intervention", s.p_no_intervention);
    s.length = j.value("length", s.length);
    if (j.contains("split")) s.split = j.at("split").get<std::array<std::size_t, 3>>();
    s.eval_samples = j.value("eval_samples", s.eval_samples);
    validate_temporal(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw RangeError("temporal", std::string("malformed temporal document: ") + e.what());
  }
}

}  // namespace lt
