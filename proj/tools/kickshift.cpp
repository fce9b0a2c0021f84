// kickshift command-line driver.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kickshift/kickshift.hpp"

namespace ks = kickshift;

namespace {

struct Common {
  std::string preset;
  std::vector<std::string> sets;
  std::string config;
  std::string out;
  unsigned threads = 1;
  bool dry_run = false;
  bool quiet = false;
};

std::filesystem::path output_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* root = std::getenv("KICKSHIFT_OUT"); root && *root) return std::filesystem::path(root) / c.preset;
  return std::filesystem::path("runs") / c.preset;
}

void add_common(CLI::App* sub, Common& c, const std::vector<std::string>& choices) {
  sub->add_option("--preset", c.preset, "pipeline to run")->check(CLI::IsMember(choices))->capture_default_str();
  sub->add_option("--set", c.sets, "override a config key (section.key=value), repeatable")->take_all();
  sub->add_option("--config", c.config, "config file ([section] key = value)")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory (default $KICKSHIFT_OUT/<preset> or runs/<preset>)");
  sub->add_option("--threads", c.threads, "worker threads for scans")->check(CLI::PositiveNumber);
  sub->add_flag("--dry-run", c.dry_run, "print the resolved config and a cost estimate, then stop");
  sub->add_flag("-q,--quiet", c.quiet, "no progress messages");
}

int run(const Common& c) {
  ks::RunOptions o;
  o.out_dir = output_dir(c);
  o.threads = c.threads;
  o.dry_run = c.dry_run;
  if (!c.quiet) o.log = [](const std::string& m) { std::cerr << "kickshift: " << m << '\n'; };
  const auto r = ks::run_preset(c.preset, c.sets, o, c.config);
  if (c.dry_run) {
    std::cout << r.report;
    return 0;
  }
  std::cout << r.manifest_path.string() << '\n' << r.manifest["results"].dump(2) << '\n';
  if (r.manifest.contains("phase_fit")) std::cout << r.manifest["phase_fit"].dump(2) << '\n';
  return 0;
}

int list_presets() {
  for (const auto& [name, p] : ks::preset_registry()) {
    std::printf("%-20s %s%s\n", name.c_str(), p.description.c_str(), p.long_running ? " [long]" : "");
    for (const auto& [key, spec] : p.schema())
      std::printf("    %-24s %-10s %-28s %s\n", key.c_str(), std::string(ks::to_string(spec.kind)).c_str(),
                  spec.default_value.empty() ? "-" : spec.default_value.c_str(), spec.help.c_str());
  }
  return 0;
}

struct ExportArgs {
  std::string checkpoint;
  std::string out;
  std::size_t stride = 1;
};

/// Full-grid density snapshot and P(z) of a stored wavefield.
int export_checkpoint(const ExportArgs& a) {
  const auto ck = ks::read_checkpoint(a.checkpoint);
  const std::filesystem::path out =
      a.out.empty() ? std::filesystem::path(a.checkpoint).replace_extension(".kssnap") : std::filesystem::path(a.out);
  const auto snap = ks::take_snapshot(ck.state, ck.t, a.stride);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  ks::write_snapshot(out, ck.state.grid(), snap, a.stride);
  auto csv = out;
  csv.replace_extension(".pz.csv");
  const auto& g = ck.state.grid();
  const auto p = ks::density_z(ck.state);
  const auto z = (g.is_cylindrical() ? g.axis(1) : g.axis(0)).nodes();
  ks::CsvWriter w(csv, {"z_au", "density"});
  for (std::size_t j = 0; j < p.size(); ++j) w.row({z[j], p[j]});
  w.close();
  std::cout << out.string() << '\n' << csv.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-cycle displacement of bound electron wavepackets"};
  app.set_version_flag("--version", KICKSHIFT_VERSION);
  app.require_subcommand(1);

  std::map<std::string, Common> common;
  struct Sub {
    const char* name;
    const char* help;
    std::vector<std::string> presets;
  };
  const std::vector<Sub> subs{
      {"design", "pulse algebra for a target displacement", {"design"}},
      {"relax", "imaginary-time ground states", {"relax-hydrogen", "relax-chain-site", "relax-helium"}},
      {"propagate", "superposition transport by one pulse", {"transport-surrogate", "transport-full"}},
      {"scan-phase", "<p_z> scan over (theta, phi) and phase fit", {"phase-scan"}},
      {"chain", "pulse-train transport along the ion chain", {"chain4-roundtrip", "chain2-roundtrip"}},
      {"helium", "two-electron transport", {"helium-singlet", "helium-triplet"}},
  };
  for (const auto& s : subs) {
    auto& c = common[s.name];
    c.preset = s.presets.front();
    add_common(app.add_subcommand(s.name, s.help), c, s.presets);
  }

  ExportArgs ex;
  auto* exp = app.add_subcommand("export", "density snapshot and P(z) from a checkpoint");
  exp->add_option("checkpoint", ex.checkpoint, "checkpoint file (.kschk)")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", ex.out, "snapshot path (default: checkpoint with .kssnap)");
  exp->add_option("--stride", ex.stride, "downsampling stride per axis")->check(CLI::PositiveNumber);

  auto* lst = app.add_subcommand("list", "presets and their config keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ks::ExitCode::config_error);
  }

  try {
    if (lst->parsed()) return list_presets();
    if (exp->parsed()) return export_checkpoint(ex);
    for (const auto& s : subs)
      if (app.got_subcommand(s.name)) return run(common[s.name]);
  } catch (const ks::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return static_cast<int>(ks::ExitCode::config_error);
  } catch (const ks::NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return static_cast<int>(ks::ExitCode::numerical_abort);
  } catch (const ks::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return static_cast<int>(ks::ExitCode::io_error);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return static_cast<int>(ks::ExitCode::io_error);
  }
  return 0;
}
