#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace lt {

/// Ground-truth causal factors, in this fixed order everywhere.
enum Factor : std::size_t { kRed = 0, kGreen = 1, kBlue = 2, kTheta1 = 3, kTheta2 = 4 };

inline constexpr std::size_t kNumFactors = 5;
inline constexpr std::array<std::string_view, kNumFactors> kFactorNames = {"R", "G", "B", "theta1", "theta2"};
/// Dataset column holding each factor's device value.
inline constexpr std::array<std::string_view, kNumFactors> kFactorColumns = {"red", "green", "blue", "pol_1",
                                                                              "pol_2"};

using FactorVector = std::array<double, kNumFactors>;

/// Valid device range of each factor in datasets.
inline constexpr double factor_lo(std::size_t k) { return k < 3 ? 0.0 : -90.0; }
inline constexpr double factor_hi(std::size_t k) { return k < 3 ? 255.0 : 90.0; }

}  // namespace lt
