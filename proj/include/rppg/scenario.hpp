#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace rppg {

enum class Lighting { Bright, Dark };
enum class HrLevel { LowHR, HighHR };

struct ScenarioLabel {
  Lighting lighting;
  HrLevel hr_level;

  friend auto operator<=>(const ScenarioLabel&, const ScenarioLabel&) = default;
};

std::string_view lighting_name(Lighting l);
std::string_view hr_level_name(HrLevel h);
std::optional<Lighting> parse_lighting(std::string_view s);
std::optional<HrLevel> parse_hr_level(std::string_view s);

/// "LowHR-Bright" style name.
std::string scenario_name(ScenarioLabel s);
std::optional<ScenarioLabel> parse_scenario_name(std::string_view s);

/// Report column order.
inline constexpr std::array<ScenarioLabel, 4> kScenarioOrder{
    ScenarioLabel{Lighting::Bright, HrLevel::LowHR}, ScenarioLabel{Lighting::Dark, HrLevel::LowHR},
    ScenarioLabel{Lighting::Bright, HrLevel::HighHR}, ScenarioLabel{Lighting::Dark, HrLevel::HighHR}};

std::size_t scenario_index(ScenarioLabel s);

}  // namespace rppg
