#include "ltbench/views.hpp"

#include <algorithm>
#include <set>

#include "ltbench/errors.hpp"

namespace lt {

ViewSpec ViewSpec::standard() {
  ViewSpec s;
  s.views = {
      {"view1", {"image"}, {kRed, kGreen, kBlue, kTheta1, kTheta2}},
      {"view2", {"current", "ir_1", "vis_1", "ir_2", "vis_2"}, {kRed, kGreen, kBlue}},
      {"view3", {"angle_1"}, {kTheta1}},
      {"view4", {"angle_2"}, {kTheta2}},
  };
  return s;
}

std::size_t ViewSpec::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < views.size(); ++i)
    if (views[i].name == name) return i;
  throw RangeError("view", "unknown view '" + name + "'");
}

ContentStyle ViewSpec::content_style(std::size_t a, std::size_t b) const {
  if (a >= views.size() || b >= views.size()) throw RangeError("view", "index out of range");
  const auto& pa = views[a].parents;
  const auto& pb = views[b].parents;
  ContentStyle cs;
  std::vector<std::size_t> uni;
  std::set_intersection(pa.begin(), pa.end(), pb.begin(), pb.end(), std::back_inserter(cs.content));
  std::set_union(pa.begin(), pa.end(), pb.begin(), pb.end(), std::back_inserter(uni));
  std::set_difference(uni.begin(), uni.end(), cs.content.begin(), cs.content.end(), std::back_inserter(cs.style));
  return cs;
}

std::vector<std::pair<std::size_t, std::size_t>> ViewSpec::all_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < views.size(); ++a)
    for (std::size_t b = a + 1; b < views.size(); ++b) out.emplace_back(a, b);
  return out;
}

void validate_views(const ViewSpec& spec) {
  std::set<std::string> seen_outputs, seen_names;
  for (const auto& v : spec.views) {
    if (!seen_names.insert(v.name).second) throw RangeError("views", "duplicate view name '" + v.name + "'");
    if (v.outputs.empty()) throw RangeError("views." + v.name, "no outputs");
    if (!std::is_sorted(v.parents.begin(), v.parents.end()) ||
        std::adjacent_find(v.parents.begin(), v.parents.end()) != v.parents.end()) {
      throw RangeError("views." + v.name, "parents must be sorted and unique");
    }
    for (auto p : v.parents)
      if (p >= kNumFactors) throw RangeError("views." + v.name, "parent index out of range");
    for (const auto& o : v.outputs) {
      if (!seen_outputs.insert(o).second) throw RangeError("views." + v.name, "output '" + o + "' is in two views");
    }
  }
}

nlohmann::json views_to_json(const ViewSpec& spec) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : spec.views) {
    std::vector<std::string> parents;
    for (auto p : v.parents) parents.emplace_back(kFactorNames[p]);
    arr.push_back({{"name", v.name}, {"outputs", v.outputs}, {"parents", parents}});
  }
  return {{"views", arr}};
}

ViewSpec views_from_json(const nlohmann::json& j) {
  try {
    ViewSpec s;
    for (const auto& v : j.at("views")) {
      ViewDef d;
      d.name = v.at("name").get<std::string>();
      d.outputs = v.at("outputs").get<std::vector<std::string>>();
      for (const auto& p : v.at("parents")) {
        const auto name = p.get<std::string>();
        auto it = std::find(kFactorNames.begin(), kFactorNames.end(), name);
        if (it == kFactorNames.end()) throw RangeError("views." + d.name, "unknown parent '" + name + "'");
        d.parents.push_back(static_cast<std::size_t>(it - kFactorNames.begin()));
      }
      std::sort(d.parents.begin(), d.parents.end());
      s.views.push_back(std::move(d));
    }
    validate_views(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw RangeError("views", std::string("malformed view document: ") + e.what());
  }
}

}  // namespace lt
