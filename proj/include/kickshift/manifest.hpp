#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "kickshift/checksum.hpp"
#include "kickshift/config.hpp"
#include "kickshift/pulse.hpp"
#include "kickshift/solver.hpp"

#ifndef KICKSHIFT_VERSION
#define KICKSHIFT_VERSION "0.0.0"
#endif

namespace kickshift {

using json = nlohmann::ordered_json;

inline constexpr const char* manifest_schema_id = "kickshift.manifest/1";

/// JSON-safe number: non-finite values become null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json pulse_json(const SingleCyclePulse& p) {
  return json{{"E0_au", p.E0},
              {"intensity_wpcm2", p.intensity()},
              {"omega_au", p.omega},
              {"t_start_au", p.t_start},
              {"sign", p.sign},
              {"duration_au", p.duration()},
              {"duration_fs", p.duration() * au_time_as / 1000.0},
              {"up_au", p.up()},
              {"final_displacement_au", p.final_displacement()}};
}

inline json plan_json(const PropagationPlan& p) {
  json pulses = json::array();
  for (const auto& x : p.pulses.pulses()) pulses.push_back(pulse_json(x));
  return json{{"dt_au", p.dt},
              {"effective_dt_au", p.effective_dt()},
              {"steps", p.steps()},
              {"t_start_au", p.t_start},
              {"t_end_au", p.t_end},
              {"mode", p.mode == TimeMode::real_time ? "real_time" : "imaginary_time"},
              {"record_every", p.record_every},
              {"density_every", p.density_every},
              {"snapshot_stride", p.snapshot_stride},
              {"boundary_limit", p.boundary_limit},
              {"hash", p.hash()},
              {"pulses", pulses}};
}

inline json grid_json(const Grid& g) {
  json axes = json::array();
  for (const auto& a : g.axes())
    axes.push_back(json{{"n_points", a.n_points},
                        {"spacing_au", a.spacing},
                        {"origin_offset_au", a.origin_offset},
                        {"stagger", a.stagger},
                        {"boundary", a.boundary == Boundary::odd ? "odd" : "periodic"}});
  return json{{"system", std::string(to_string(g.system()))},
              {"radial_kinetic", std::string(to_string(g.radial_kinetic()))},
              {"axes", axes}};
}

/// Every key of the resolved config: its text and, for physical kinds, the value in atomic units.
inline json config_json(const Config& c) {
  json out = json::object();
  for (const auto& [key, text] : c.values()) {
    const auto& spec = c.schema().at(key);
    json e{{"text", text}, {"kind", std::string(to_string(spec.kind))}};
    if (!text.empty() && spec.kind != Kind::text && spec.kind != Kind::flag) {
      if (spec.list) {
        json arr = json::array();
        for (double v : c.quantities(key)) arr.push_back(v);
        e["value"] = arr;
      } else if (spec.kind == Kind::integer) {
        e["value"] = c.integer(key);
      } else {
        e["value"] = c.quantity(key);
      }
    } else if (spec.kind == Kind::flag) {
      e["value"] = c.flag(key);
    }
    out[key] = e;
  }
  return out;
}

/// Collects one run's record and writes manifest.json into the run directory.
class ManifestBuilder {
public:
  ManifestBuilder(std::string preset, std::filesystem::path dir)
      : dir_(std::move(dir)), start_(std::chrono::steady_clock::now()) {
    doc_["schema"] = manifest_schema_id;
    doc_["preset"] = std::move(preset);
    doc_["code_version"] = KICKSHIFT_VERSION;
    doc_["serial"] = true;
    doc_["config"] = json::object();
    doc_["grid"] = nullptr;
    doc_["pulses"] = json::array();
    doc_["plan"] = nullptr;
    doc_["results"] = json::object();
    doc_["outputs"] = json::array();
  }

  const std::filesystem::path& dir() const { return dir_; }
  json& doc() { return doc_; }
  json& results() { return doc_["results"]; }

  void set_config(const Config& c) { doc_["config"] = config_json(c); }
  void set_grid(const Grid& g) { doc_["grid"] = grid_json(g); }
  void set_plan(const PropagationPlan& p) {
    doc_["plan"] = plan_json(p);
    doc_["pulses"] = doc_["plan"]["pulses"];
  }
  void add_pulse(const SingleCyclePulse& p) { doc_["pulses"].push_back(pulse_json(p)); }
  void set_serial(bool s) { doc_["serial"] = s; }

  /// Registers a file in the run directory with its checksum.
  void add_output(const std::filesystem::path& p, const std::string& kind, const std::string& description = "") {
    const auto rel = std::filesystem::relative(p, dir_);
    doc_["outputs"].push_back(json{{"path", rel.generic_string()},
                                   {"kind", kind},
                                   {"bytes", std::filesystem::file_size(p)},
                                   {"sha256", sha256_file(p)},
                                   {"description", description}});
  }

  std::filesystem::path write() {
    doc_["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const auto p = dir_ / "manifest.json";
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out << doc_.dump(2) << '\n';
    if (!out) throw IoError("write failed on " + p.string());
    return p;
  }

private:
  std::filesystem::path dir_;
  std::chrono::steady_clock::time_point start_;
  json doc_;
};

/// Recomputes every output checksum listed in a manifest; returns the mismatching paths.
inline std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open " + manifest_path.string());
  const json doc = json::parse(in);
  std::vector<std::string> bad;
  const auto dir = manifest_path.parent_path();
  for (const auto& o : doc.at("outputs")) {
    const auto p = dir / o.at("path").get<std::string>();
    if (!std::filesystem::exists(p) || sha256_file(p) != o.at("sha256").get<std::string>())
      bad.push_back(o.at("path").get<std::string>());
  }
  return bad;
}

}  // namespace kickshift
