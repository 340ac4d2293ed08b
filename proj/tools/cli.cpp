#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nosig/scenario_io.hpp"

namespace nosig::cli {

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int threads = 0;
};

std::string fixed12(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of −0
  std::ostringstream os;
  os << std::fixed << std::setprecision(12) << v;
  const std::string s = os.str();
  return s == "-0.000000000000" ? "0.000000000000" : s;
}

LinearOperator observable_from_file(const std::string& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("observable file: ") + e.what());
  }
  DenseMatrix c = DenseMatrix::Zero(2, 2);
  try {
    if (!j.is_object()) throw ValidationError("observable file: expected an object");
    for (const auto& [k, v] : j.items()) {
      if (k != "re" && k != "im") throw ValidationError("observable file: unknown key '" + k + "'");
    }
    for (int part = 0; part < 2; ++part) {
      const char* key = part == 0 ? "re" : "im";
      if (!j.contains(key)) continue;
      const auto& m = j[key];
      if (!m.is_array() || m.size() != 2) {
        throw ValidationError(std::string("observable file: '") + key + "' must be 2x2");
      }
      for (int r = 0; r < 2; ++r) {
        if (!m[r].is_array() || m[r].size() != 2) {
          throw ValidationError(std::string("observable file: '") + key + "' must be 2x2");
        }
        for (int col = 0; col < 2; ++col) {
          const double x = m[r][col].get<double>();
          c(r, col) += part == 0 ? Complex(x, 0.0) : Complex(0.0, x);
        }
      }
    }
  } catch (const nlohmann::json::type_error& e) {
    throw ValidationError(std::string("observable file: ") + e.what());
  }
  return {c, spin::tag()};
}

int cmd_naive(const std::string& observable, const std::string& observable_file, bool kick,
              std::ostream& out) {
  std::optional<LinearOperator> c;
  if (!observable_file.empty()) {
    c = observable_from_file(observable_file);
  } else if (observable == "sx") {
    c = spin::sigma_x();
  } else if (observable == "sy") {
    c = spin::sigma_y();
  } else if (observable == "sz") {
    c = spin::sigma_z();
  } else if (observable == "identity") {
    c = spin::identity();
  } else {
    throw ValidationError("--observable: 'file' needs --observable-file");
  }
  try {
    out << fixed12(run_naive_sorkin(*c, kick)) << "\n";
  } catch (const PreconditionError& e) {
    throw ValidationError(e.what());
  }
  return kOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path, const Globals& g,
                 std::ostream& out) {
  const ScenarioConfig cfg = parse_config(config_path);
  const auto start = std::chrono::steady_clock::now();
  const SignalingReport report = run_scenario(cfg, {.threads = g.threads});
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  const std::string text =
      report_to_text(report, {cfg, tool_version(), elapsed.count(), g.seed});
  if (out_path.empty()) {
    out << text;
  } else {
    write_text_file(out_path, text);
  }
  return kOk;
}

int cmd_check_spacelike(const std::string& config_path, std::ostream& out, std::ostream& err) {
  const ScenarioConfig cfg = parse_config(config_path);
  const Lattice1D lat(cfg.n, cfg.hopping);
  const CompositeSpace space(cfg.n);
  const auto packet = [&](const PacketSpec& p) {
    return wavepacket(lat, p.support, p.center, p.width, p.momentum);
  };
  const StateVector psi =
      prepare_initial(space, cfg.statistics, packet(cfg.packet1), packet(cfg.packet2));
  const SpacelikeCertificate cert =
      check_spacelike(lat, cfg.O1, cfg.O3, psi, cfg.t1 + cfg.t2, cfg.eps);
  out << certificate_to_text(cert);
  if (cert.pass) return kOk;
  std::ostringstream why;
  why << std::setprecision(6) << "certificate failed (epsilon " << cert.epsilon << "):";
  if (cert.leak_13 > cert.epsilon) why << " leak_13 = " << cert.leak_13;
  if (cert.leak_31 > cert.epsilon) why << " leak_31 = " << cert.leak_31;
  if (cert.overlap_O1 > cert.epsilon) why << " overlap_O1 = " << cert.overlap_O1;
  if (cert.overlap_O3 > cert.epsilon) why << " overlap_O3 = " << cert.overlap_O3;
  err << why.str() << "\n";
  return kCertificateFailure;
}

const BranchEnsemble& stage_of(const ArmTrace& t, const std::string& stage) {
  if (stage == "prepared") return t.prepared;
  if (stage == "post_kick") return t.post_kick;
  if (stage == "post_o2") return t.post_o2;
  return t.final;
}

std::string density_csv(const SiteMarginals& m) {
  std::ostringstream os;
  os << "site,occ_particle_slot1,occ_particle_slot2,occ_symmetrized\n";
  for (Index x = 0; x < m.slot1.size(); ++x) {
    os << x << "," << fixed12(m.slot1[x]) << "," << fixed12(m.slot2[x]) << ","
       << fixed12(m.slot1[x] + m.slot2[x]) << "\n";
  }
  return os.str();
}

std::string state_dump(const BranchEnsemble& e) {
  std::ostringstream os;
  os << std::setprecision(17);
  std::size_t k = 0;
  for (const auto& b : e) {
    os << "# branch " << k++ << " weight " << b.weight << "\n";
    os << "index,re,im\n";
    for (Index i = 0; i < b.state.dim(); ++i) {
      const Complex a = b.state[i];
      if (a != Complex(0.0)) os << i << "," << a.real() << "," << a.imag() << "\n";
    }
  }
  return os.str();
}

int cmd_dump_density(const std::string& config_path, const std::string& out_path,
                     const std::string& arm, const std::string& stage,
                     const std::string& state_path, std::ostream& out) {
  const ScenarioConfig cfg = parse_config(config_path);
  const ArmTrace trace = run_arm(cfg, arm == "kick");
  const BranchEnsemble& e = stage_of(trace, stage);
  const std::string csv = density_csv(site_marginals(CompositeSpace(cfg.n), e));
  if (out_path.empty()) {
    out << csv;
  } else {
    write_text_file(out_path, csv);
  }
  if (!state_path.empty()) write_text_file(state_path, state_dump(e));
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Localized kick / joint-measurement / detector signaling simulator", "nosig"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());
  Globals g;
  app.add_option("--seed", g.seed, "Seed recorded in report manifests");
  app.add_option("--threads", g.threads, "Worker threads (0 = auto)")->check(CLI::NonNegativeNumber);

  std::string observable = "sz";
  std::string observable_file;
  bool kick = false;
  auto* naive = app.add_subcommand("naive", "Two-spin calculation without spatial structure");
  naive->add_option("--observable", observable, "Observable on spin 2")
      ->check(CLI::IsMember({"sx", "sy", "sz", "identity", "file"}));
  naive->add_option("--observable-file", observable_file,
                    "JSON file {\"re\": [[..],[..]], \"im\": [[..],[..]]}");
  naive->add_flag("--kick", kick, "Flip spin 1 before the joint measurement");

  std::string config;
  std::string out_path;
  auto* simulate = app.add_subcommand("simulate", "Run both arms and write a signaling report");
  simulate->add_option("config", config, "Scenario file")->required();
  simulate->add_option("--out,-o", out_path, "Report path (default: stdout)");

  auto* check = app.add_subcommand("check-spacelike", "Certify O1/O3 separation; exit 1 on failure");
  check->add_option("config", config, "Scenario file")->required();

  std::string arm = "nokick";
  std::string stage = "final";
  std::string state_path;
  auto* dump = app.add_subcommand("dump-density", "Per-site occupancy CSV of one arm and stage");
  dump->add_option("config", config, "Scenario file")->required();
  dump->add_option("--out,-o", out_path, "CSV path (default: stdout)");
  dump->add_option("--arm", arm, "kick | nokick")->check(CLI::IsMember({"kick", "nokick"}));
  dump->add_option("--stage", stage, "prepared | post_kick | post_o2 | final")
      ->check(CLI::IsMember({"prepared", "post_kick", "post_o2", "final"}));
  dump->add_option("--dump-state", state_path, "Write index,re,im amplitudes of each branch");

  // CLI11 parses the reversed argument vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  }

  try {
    if (*naive) return cmd_naive(observable, observable_file, kick, out);
    if (*simulate) return cmd_simulate(config, out_path, g, out);
    if (*check) return cmd_check_spacelike(config, out, err);
    return cmd_dump_density(config, out_path, arm, stage, state_path, out);
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::domain_error& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::out_of_range& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidationError;
  }
}

}  // namespace nosig::cli
