#pragma once

// Grouping of the tunnel outputs into views, and the content / style split of
// the causal factors for every pair of views.

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ltbench/factors.hpp"

namespace lt {

struct ViewDef {
  std::string name;
  /// Output variables observed in this view ("image" stands for the camera).
  std::vector<std::string> outputs;
  /// Factor indices the outputs depend on, sorted.
  std::vector<std::size_t> parents;
};

struct ContentStyle {
  std::vector<std::size_t> content;  // intersection of the parent sets
  std::vector<std::size_t> style;    // union minus the intersection
};

struct ViewSpec {
  std::vector<ViewDef> views;

  /// view1: image; view2: current, ir_1, vis_1, ir_2, vis_2; view3: angle_1;
  /// view4: angle_2.
  static ViewSpec standard();

  std::size_t index_of(const std::string& name) const;
  ContentStyle content_style(std::size_t a, std::size_t b) const;
  /// All unordered pairs (a < b).
  std::vector<std::pair<std::size_t, std::size_t>> all_pairs() const;
};

/// Throws RangeError when views share an output, a view is empty, or a parent
/// index is out of range.
void validate_views(const ViewSpec& spec);

nlohmann::json views_to_json(const ViewSpec& spec);
ViewSpec views_from_json(const nlohmann::json& j);

}  // namespace lt
