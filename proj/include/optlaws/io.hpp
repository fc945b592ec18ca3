#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "optlaws/features.hpp"
#include "optlaws/law.hpp"
#include "optlaws/schedule.hpp"

namespace optlaws::io {

using nlohmann::json;

json to_json(const Schedule& schedule);
Schedule schedule_from_json(const json& doc);

json to_json(const FeatureVector& features);

json to_json(const FittedLaw& law);
FittedLaw law_from_json(const json& doc);

/// A config document either embeds a full schedule
///   {"model": N, "schedule": {...}, "label": "..."}
/// or names the four-phase parameters in normalized units
///   {"model": N, "tokens": S, "eta1": .., "eta2": .., "markers": [a1, a2, a3],
///    "cooldown": "linear|cosine"}.
Config config_from_json(const json& doc);

/// Header row of the run-log CSV.
inline constexpr const char* kRunCsvHeader =
    "model_B,tokens_B,eta1,eta2,a1_B,a2_B,a3_B,loss,diverged";

/// Parses run logs. Errors name the 1-based line number.
std::vector<RunRecord> read_runs_csv(std::istream& in);
std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path);
void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs);

json read_json(const std::filesystem::path& path);
/// Pretty-printed with sorted keys and a trailing newline.
void write_json(const std::filesystem::path& path, const json& doc);
std::string dump(const json& doc);

}  // namespace optlaws::io
