#include "nosig/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#ifndef NOSIG_VERSION
#define NOSIG_VERSION "unknown"
#endif

namespace nosig {

using nlohmann::json;

namespace {

template <typename Enum>
struct EnumName {
  Enum value;
  const char* name;
};

constexpr EnumName<Statistics> kStatistics[] = {{Statistics::fermion, "fermion"},
                                                {Statistics::boson, "boson"},
                                                {Statistics::distinguishable, "distinguishable"}};
constexpr EnumName<KickMode> kKickModes[] = {
    {KickMode::off, "off"}, {KickMode::position, "position"}, {KickMode::label1, "label1"}};
constexpr EnumName<JointMode> kJointModes[] = {{JointMode::none, "none"},
                                               {JointMode::global_bell, "global_bell"},
                                               {JointMode::localized_bell, "localized_bell"}};
constexpr EnumName<DetectorMode> kDetectorModes[] = {{DetectorMode::position, "position"},
                                                     {DetectorMode::label2, "label2"}};

template <typename Enum, std::size_t N>
Enum enum_from(const json& j, const std::string& key, const EnumName<Enum> (&table)[N]) {
  if (!j.is_string()) throw ConfigParseError("key '" + key + "': expected a string");
  const auto s = j.get<std::string>();
  for (const auto& e : table) {
    if (s == e.name) return e.value;
  }
  std::string allowed;
  for (const auto& e : table) allowed += std::string(allowed.empty() ? "" : ", ") + e.name;
  throw ConfigParseError("key '" + key + "': unknown value '" + s + "' (expected one of " +
                         allowed + ")");
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    if (!known.contains(k)) {
      throw ConfigParseError("unknown key '" + where + k + "'");
    }
  }
}

double number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigParseError("key '" + key + "': expected a number");
  return j.get<double>();
}

Index integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigParseError("key '" + key + "': expected an integer");
  return j.get<Index>();
}

Region region(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ConfigParseError("key '" + key + "': expected [lo, hi] integer pair");
  }
  return {j[0].get<Index>(), j[1].get<Index>()};
}

PacketSpec packet(const json& j, const std::string& key, PacketSpec p) {
  if (!j.is_object()) throw ConfigParseError("key '" + key + "': expected an object");
  reject_unknown(j, {"support", "center", "width", "momentum"}, key + ".");
  if (j.contains("support")) p.support = region(j["support"], key + ".support");
  if (j.contains("center")) p.center = number(j["center"], key + ".center");
  if (j.contains("width")) p.width = number(j["width"], key + ".width");
  if (j.contains("momentum")) p.momentum = number(j["momentum"], key + ".momentum");
  return p;
}

json region_json(const Region& r) { return json::array({r.lo, r.hi}); }

json packet_json(const PacketSpec& p) {
  return {{"support", region_json(p.support)},
          {"center", p.center},
          {"width", p.width},
          {"momentum", p.momentum}};
}

template <typename Enum, std::size_t N>
std::string enum_name(Enum v, const EnumName<Enum> (&table)[N]) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  return "unknown";
}

json config_json(const ScenarioConfig& c) {
  return {{"n", c.n},
          {"hopping", c.hopping},
          {"O1", region_json(c.O1)},
          {"O2", region_json(c.O2)},
          {"O3", region_json(c.O3)},
          {"packet1", packet_json(c.packet1)},
          {"packet2", packet_json(c.packet2)},
          {"statistics", enum_name(c.statistics, kStatistics)},
          {"kick_mode", enum_name(c.kick_mode, kKickModes)},
          {"joint_mode", enum_name(c.joint_mode, kJointModes)},
          {"detector_mode", enum_name(c.detector_mode, kDetectorModes)},
          {"t1", c.t1},
          {"t2", c.t2},
          {"eps", c.eps},
          {"selective_o3", c.selective_o3}};
}

ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigParseError("config: top level must be an object");
  reject_unknown(j,
                 {"n", "hopping", "O1", "O2", "O3", "packet1", "packet2", "statistics",
                  "kick_mode", "joint_mode", "detector_mode", "t1", "t2", "eps", "selective_o3"},
                 "");
  ScenarioConfig c;
  if (j.contains("n")) c.n = integer(j["n"], "n");
  if (j.contains("hopping")) c.hopping = number(j["hopping"], "hopping");
  if (j.contains("O1")) c.O1 = region(j["O1"], "O1");
  if (j.contains("O2")) c.O2 = region(j["O2"], "O2");
  if (j.contains("O3")) c.O3 = region(j["O3"], "O3");
  if (j.contains("packet1")) c.packet1 = packet(j["packet1"], "packet1", c.packet1);
  if (j.contains("packet2")) c.packet2 = packet(j["packet2"], "packet2", c.packet2);
  if (j.contains("statistics")) c.statistics = enum_from(j["statistics"], "statistics", kStatistics);
  if (j.contains("kick_mode")) c.kick_mode = enum_from(j["kick_mode"], "kick_mode", kKickModes);
  if (j.contains("joint_mode")) c.joint_mode = enum_from(j["joint_mode"], "joint_mode", kJointModes);
  if (j.contains("detector_mode")) {
    c.detector_mode = enum_from(j["detector_mode"], "detector_mode", kDetectorModes);
  }
  if (j.contains("t1")) c.t1 = number(j["t1"], "t1");
  if (j.contains("t2")) c.t2 = number(j["t2"], "t2");
  if (j.contains("eps")) c.eps = number(j["eps"], "eps");
  if (j.contains("selective_o3")) {
    if (!j["selective_o3"].is_boolean()) {
      throw ConfigParseError("key 'selective_o3': expected a boolean");
    }
    c.selective_o3 = j["selective_o3"].get<bool>();
  }
  return c;
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigParseError(std::string(what) + ": " + e.what());
  }
}

json certificate_json(const SpacelikeCertificate& c) {
  return {{"epsilon", c.epsilon},       {"leak_13", c.leak_13},       {"leak_31", c.leak_31},
          {"overlap_O1", c.overlap_O1}, {"overlap_O3", c.overlap_O3}, {"pass", c.pass}};
}

const json& field(const json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigParseError("report: missing key '" + key + "'");
  return j[key];
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  ScenarioConfig c = config_from_json(parse_json(text, "config"));
  validate(c);
  return c;
}

ScenarioConfig parse_config(const std::filesystem::path& path) {
  return parse_config_text(read_text_file(path));
}

std::string config_to_text(const ScenarioConfig& cfg) { return config_json(cfg).dump(2); }

std::string tool_version() { return NOSIG_VERSION; }

std::string report_to_text(const SignalingReport& r, const RunManifest& m) {
  const json j = {{"p_q1_kick", r.p_q1_kick},
                  {"p_q1_nokick", r.p_q1_nokick},
                  {"delta", r.delta},
                  {"arrival_prob", r.arrival_prob},
                  {"certificate", certificate_json(r.certificate)},
                  {"max_antisym_violation", r.max_antisym_violation},
                  {"branch_count_kick", r.branch_count_kick},
                  {"branch_count_nokick", r.branch_count_nokick},
                  {"manifest",
                   {{"config", config_json(m.config)},
                    {"tool_version", m.tool_version},
                    {"wall_clock_seconds", m.wall_clock_seconds},
                    {"seed", m.seed}}}};
  return j.dump(2) + "\n";
}

ParsedReport parse_report_text(const std::string& text) {
  const json j = parse_json(text, "report");
  reject_unknown(j,
                 {"p_q1_kick", "p_q1_nokick", "delta", "arrival_prob", "certificate",
                  "max_antisym_violation", "branch_count_kick", "branch_count_nokick", "manifest"},
                 "");
  try {
    ParsedReport out;
    auto& r = out.report;
    r.p_q1_kick = field(j, "p_q1_kick").get<double>();
    r.p_q1_nokick = field(j, "p_q1_nokick").get<double>();
    r.delta = field(j, "delta").get<double>();
    r.arrival_prob = field(j, "arrival_prob").get<double>();
    const json& c = field(j, "certificate");
    r.certificate.epsilon = field(c, "epsilon").get<double>();
    r.certificate.leak_13 = field(c, "leak_13").get<double>();
    r.certificate.leak_31 = field(c, "leak_31").get<double>();
    r.certificate.overlap_O1 = field(c, "overlap_O1").get<double>();
    r.certificate.overlap_O3 = field(c, "overlap_O3").get<double>();
    r.certificate.pass = field(c, "pass").get<bool>();
    r.max_antisym_violation = field(j, "max_antisym_violation").get<double>();
    r.branch_count_kick = field(j, "branch_count_kick").get<std::size_t>();
    r.branch_count_nokick = field(j, "branch_count_nokick").get<std::size_t>();
    const json& m = field(j, "manifest");
    out.manifest.config = config_from_json(field(m, "config"));
    out.manifest.tool_version = field(m, "tool_version").get<std::string>();
    out.manifest.wall_clock_seconds = field(m, "wall_clock_seconds").get<double>();
    out.manifest.seed = field(m, "seed").get<std::uint64_t>();
    return out;
  } catch (const json::type_error& e) {
    throw ConfigParseError(std::string("report: ") + e.what());
  }
}

std::string certificate_to_text(const SpacelikeCertificate& cert) {
  return certificate_json(cert).dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace nosig
