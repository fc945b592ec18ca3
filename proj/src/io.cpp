#include "optlaws/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "optlaws/error.hpp"

namespace optlaws::io {

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(std::string_view field, std::size_t line, std::string_view column) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
    field.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    std::ostringstream msg;
    msg << "line " << line << ": column '" << column << "' is not a number: '" << field << "'";
    throw DataError(msg.str());
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T required(const json& doc, const char* key) {
  if (!doc.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("field '") + key + "': " + e.what());
  }
}

template <std::size_t K>
std::array<double, K> fixed_array(const json& doc, const char* key) {
  const auto v = required<std::vector<double>>(doc, key);
  if (v.size() != K) {
    std::ostringstream msg;
    msg << "field '" << key << "' needs " << K << " entries, got " << v.size();
    throw DataError(msg.str());
  }
  std::array<double, K> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

}  // namespace

json to_json(const Schedule& schedule) {
  json segs = json::array();
  for (const Segment& s : schedule.segments()) {
    segs.push_back({{"kind", std::string(to_string(s.kind))},
                    {"t0", s.t_start},
                    {"t1", s.t_end},
                    {"eta0", s.eta_start},
                    {"eta1", s.eta_end}});
  }
  const Markers& m = schedule.markers();
  return {{"S", schedule.horizon()}, {"markers", {m.a1, m.a2, m.a3}}, {"segments", segs}};
}

Schedule schedule_from_json(const json& doc) {
  if (!doc.is_object()) throw DataError("schedule must be a JSON object");
  const auto markers = fixed_array<3>(doc, "markers");
  const auto& segs = doc.contains("segments") ? doc.at("segments") : json();
  if (!segs.is_array()) throw DataError("schedule needs a 'segments' array");
  std::vector<Segment> out;
  for (const json& s : segs) {
    out.push_back({segment_kind_from_string(required<std::string>(s, "kind")),
                   required<double>(s, "t0"), required<double>(s, "t1"),
                   required<double>(s, "eta0"), required<double>(s, "eta1")});
  }
  Schedule schedule(std::move(out), {markers[0], markers[1], markers[2]});
  if (doc.contains("S") && required<double>(doc, "S") != schedule.horizon())
    throw DataError("schedule 'S' does not match the last segment end");
  return schedule;
}

json to_json(const FeatureVector& features) {
  json out = json::array();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const FeatureEntry e = features.entry(i);
    out.push_back({{"name", std::string(e.name)}, {"power", e.power}, {"value", e.value}});
  }
  return out;
}

json to_json(const FittedLaw& law) {
  return {
      {"c", law.c},
      {"powers", law.powers.values},
      {"lr_scale", law.normalizer.lr_scale},
      {"mode", std::string(to_string(law.mode))},
      {"policy", law.policy.to_string()},
      {"terms", std::string(to_string(law.terms))},
      {"residual_rms", law.residual_rms},
      {"residual_max", law.residual_max},
      {"condition_number", law.condition_number},
      {"rows", law.rows},
      {"reference_only", law.reference_only},
  };
}

FittedLaw law_from_json(const json& doc) {
  if (!doc.is_object()) throw DataError("law must be a JSON object");
  FittedLaw law;
  law.c = fixed_array<kFeatureCount>(doc, "c");
  law.powers.values = fixed_array<kFeatureCount>(doc, "powers");
  law.normalizer.lr_scale = required<double>(doc, "lr_scale");
  if (!(law.normalizer.lr_scale > 0.0)) throw DataError("lr_scale must be positive");
  law.mode = law_mode_from_string(required<std::string>(doc, "mode"));
  law.policy = PolicyRule::parse(required<std::string>(doc, "policy"));
  if (doc.contains("terms")) law.terms = term_set_from_string(required<std::string>(doc, "terms"));
  law.residual_rms = required<double>(doc, "residual_rms");
  if (doc.contains("residual_max")) law.residual_max = required<double>(doc, "residual_max");
  const json& cn = doc.contains("condition_number") ? doc.at("condition_number") : json();
  law.condition_number = cn.is_number() ? cn.get<double>() : 0.0;
  if (doc.contains("rows")) law.rows = required<std::size_t>(doc, "rows");
  if (doc.contains("reference_only")) law.reference_only = required<bool>(doc, "reference_only");
  return law;
}

Config config_from_json(const json& doc) {
  if (!doc.is_object()) throw DataError("config must be a JSON object");
  const double model = required<double>(doc, "model");
  std::string label = doc.contains("label") ? required<std::string>(doc, "label") : "";
  if (doc.contains("schedule")) return {schedule_from_json(doc.at("schedule")), model, label};
  const auto m = fixed_array<3>(doc, "markers");
  CooldownShape shape = CooldownShape::linear;
  if (doc.contains("cooldown")) {
    const auto name = required<std::string>(doc, "cooldown");
    if (name == "cosine")
      shape = CooldownShape::cosine;
    else if (name != "linear")
      throw DataError("cooldown must be \"linear\" or \"cosine\"");
  }
  return {Schedule::general(required<double>(doc, "eta1"), required<double>(doc, "eta2"),
                            {m[0], m[1], m[2]}, required<double>(doc, "tokens"), shape),
          model, label};
}

std::vector<RunRecord> read_runs_csv(std::istream& in) {
  static constexpr std::array<std::string_view, 9> kColumns{
      "model_B", "tokens_B", "eta1", "eta2", "a1_B", "a2_B", "a3_B", "loss", "diverged"};
  std::string line;
  std::size_t lineno = 0;
  std::vector<RunRecord> runs;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line);
    if (!header_seen) {
      header_seen = true;
      if (line != kRunCsvHeader) {
        std::ostringstream msg;
        msg << "line " << lineno << ": expected header '" << kRunCsvHeader << "'";
        throw DataError(msg.str());
      }
      continue;
    }
    if (fields.size() != kColumns.size()) {
      std::ostringstream msg;
      msg << "line " << lineno << ": expected " << kColumns.size() << " fields, got "
          << fields.size();
      throw DataError(msg.str());
    }
    std::array<double, 9> v{};
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = parse_double(fields[i], lineno, kColumns[i]);
    if (v[8] != 0.0 && v[8] != 1.0) {
      std::ostringstream msg;
      msg << "line " << lineno << ": column 'diverged' must be 0 or 1";
      throw DataError(msg.str());
    }
    RunRecord r;
    r.model = v[0];
    r.tokens = v[1];
    r.eta1 = v[2];
    r.eta2 = v[3];
    r.markers = {v[4], v[5], v[6]};
    r.loss = v[7];
    r.diverged = v[8] == 1.0;
    try {
      r.validate();
    } catch (const DataError& e) {
      std::ostringstream msg;
      msg << "line " << lineno << ": " << e.what();
      throw DataError(msg.str());
    }
    runs.push_back(r);
  }
  if (!header_seen) throw DataError("run log is empty");
  return runs;
}

std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_runs_csv(in);
}

void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs) {
  out << kRunCsvHeader << '\n';
  for (const RunRecord& r : runs) {
    out << format_double(r.model) << ',' << format_double(r.tokens) << ','
        << format_double(r.eta1) << ',' << format_double(r.eta2) << ','
        << format_double(r.markers.a1) << ',' << format_double(r.markers.a2) << ','
        << format_double(r.markers.a3) << ',' << format_double(r.loss) << ','
        << (r.diverged ? 1 : 0) << '\n';
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("'" + path.string() + "': " + e.what());
  }
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << dump(doc);
}

}  // namespace optlaws::io
