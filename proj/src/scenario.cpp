#include "rppg/scenario.hpp"

namespace rppg {

std::string_view lighting_name(Lighting l) { return l == Lighting::Bright ? "Bright" : "Dark"; }

std::string_view hr_level_name(HrLevel h) { return h == HrLevel::LowHR ? "LowHR" : "HighHR"; }

std::optional<Lighting> parse_lighting(std::string_view s) {
  if (s == "Bright") return Lighting::Bright;
  if (s == "Dark") return Lighting::Dark;
  return std::nullopt;
}

std::optional<HrLevel> parse_hr_level(std::string_view s) {
  if (s == "LowHR") return HrLevel::LowHR;
  if (s == "HighHR") return HrLevel::HighHR;
  return std::nullopt;
}

std::string scenario_name(ScenarioLabel s) {
  return std::string(hr_level_name(s.hr_level)) + "-" + std::string(lighting_name(s.lighting));
}

std::optional<ScenarioLabel> parse_scenario_name(std::string_view s) {
  const auto dash = s.find('-');
  if (dash == std::string_view::npos) return std::nullopt;
  const auto level = parse_hr_level(s.substr(0, dash));
  const auto light = parse_lighting(s.substr(dash + 1));
  if (!level || !light) return std::nullopt;
  return ScenarioLabel{*light, *level};
}

std::size_t scenario_index(ScenarioLabel s) {
  for (std::size_t i = 0; i < kScenarioOrder.size(); ++i) {
    if (kScenarioOrder[i] == s) return i;
  }
  return kScenarioOrder.size();
}

}  // namespace rppg
