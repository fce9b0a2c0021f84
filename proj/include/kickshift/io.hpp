#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "kickshift/config.hpp"
#include "kickshift/retrieval.hpp"
#include "kickshift/solver.hpp"

namespace kickshift {

namespace fs = std::filesystem;

// Binary layout (all little-endian):
//
//   magic        char[8]   "KSSNAP01" (density snapshot) or "KSCHK001" (checkpoint)
//   version      u32       1
//   system       u32       0 cylindrical_rz, 1 cartesian_2e, 2 cartesian_1d
//   radial       u32       0 conservative, 1 sine
//   n_axes       u32
//   per axis:    n_points u64, spacing f64, origin_offset f64, stagger u32, boundary u32, stride u64
//   time         f64       atomic units
//   plan hash    char[64]  hex SHA-256 (checkpoints only)
//   count        u64
//   payload      count f64 (snapshot) or count (re, im) f64 pairs (checkpoint), row-major, last axis fastest

inline constexpr std::array<char, 8> snapshot_magic{'K', 'S', 'S', 'N', 'A', 'P', '0', '1'};
inline constexpr std::array<char, 8> checkpoint_magic{'K', 'S', 'C', 'H', 'K', '0', '0', '1'};
inline constexpr std::uint32_t binary_version = 1;

namespace detail {

template <class T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto b = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(b.begin(), b.end());
    return std::bit_cast<T>(b);
  }
}

class BinWriter {
public:
  explicit BinWriter(const fs::path& p) : path_(p), out_(p, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open " + p.string() + " for writing");
  }
  template <class T>
  void put(T v) {
    v = to_le(v);
    raw(&v, sizeof v);
  }
  void raw(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw IoError("write failed on " + path_.string());
  }
  void doubles(const double* p, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
      raw(p, n * sizeof(double));
    } else {
      for (std::size_t i = 0; i < n; ++i) put(p[i]);
    }
  }
  void close() {
    out_.close();
    if (!out_) throw IoError("close failed on " + path_.string());
  }

private:
  fs::path path_;
  std::ofstream out_;
};

class BinReader {
public:
  explicit BinReader(const fs::path& p) : path_(p), in_(p, std::ios::binary) {
    if (!in_) throw IoError("cannot open " + p.string() + " for reading");
  }
  template <class T>
  T get() {
    T v{};
    raw(&v, sizeof v);
    return to_le(v);
  }
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw IoError("truncated file " + path_.string());
  }
  void doubles(double* p, std::size_t n) {
    raw(p, n * sizeof(double));
    if constexpr (std::endian::native != std::endian::little)
      for (std::size_t i = 0; i < n; ++i) p[i] = to_le(p[i]);
  }
  bool at_end() {
    in_.peek();
    return in_.eof();
  }

private:
  fs::path path_;
  std::ifstream in_;
};

inline std::uint32_t system_code(GridSystem s) {
  switch (s) {
    case GridSystem::cylindrical_rz: return 0;
    case GridSystem::cartesian_2e: return 1;
    case GridSystem::cartesian_1d: return 2;
  }
  return 0;
}

inline GridSystem system_from_code(std::uint32_t c) {
  switch (c) {
    case 0: return GridSystem::cylindrical_rz;
    case 1: return GridSystem::cartesian_2e;
    case 2: return GridSystem::cartesian_1d;
    default: throw IoError("unknown grid system code " + std::to_string(c));
  }
}

inline void write_descriptor(BinWriter& w, const Grid& g, std::size_t stride) {
  w.put(binary_version);
  w.put(system_code(g.system()));
  w.put(static_cast<std::uint32_t>(g.radial_kinetic() == RadialKinetic::sine ? 1 : 0));
  w.put(static_cast<std::uint32_t>(g.axes().size()));
  for (const auto& a : g.axes()) {
    w.put(static_cast<std::uint64_t>(a.n_points));
    w.put(a.spacing);
    w.put(a.origin_offset);
    w.put(static_cast<std::uint32_t>(a.stagger ? 1 : 0));
    w.put(static_cast<std::uint32_t>(a.boundary == Boundary::odd ? 1 : 0));
    w.put(static_cast<std::uint64_t>(stride));
  }
}

struct Descriptor {
  GridPtr grid;
  std::size_t stride = 1;
};

inline Descriptor read_descriptor(BinReader& r, const fs::path& p) {
  const auto version = r.get<std::uint32_t>();
  if (version != binary_version) throw IoError(p.string() + ": unsupported version " + std::to_string(version));
  const GridSystem sys = system_from_code(r.get<std::uint32_t>());
  const RadialKinetic rk = r.get<std::uint32_t>() == 1 ? RadialKinetic::sine : RadialKinetic::conservative;
  const auto n_axes = r.get<std::uint32_t>();
  if (n_axes < 1 || n_axes > 2) throw IoError(p.string() + ": bad axis count");
  std::vector<Axis> axes;
  std::size_t stride = 1;
  for (std::uint32_t i = 0; i < n_axes; ++i) {
    const auto n = r.get<std::uint64_t>();
    const auto spacing = r.get<double>();
    const auto offset = r.get<double>();
    const bool stagger = r.get<std::uint32_t>() == 1;
    const Boundary b = r.get<std::uint32_t>() == 1 ? Boundary::odd : Boundary::periodic;
    stride = r.get<std::uint64_t>();
    axes.emplace_back(static_cast<std::size_t>(n), spacing, offset, stagger, b);
  }
  return {std::make_shared<const Grid>(sys, std::move(axes), rk), stride};
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Fails with IoError when the target filesystem has less than `bytes` free.
inline void ensure_space(const fs::path& dir, std::uintmax_t bytes) {
  std::error_code ec;
  const auto info = fs::space(dir, ec);
  if (ec) return;
  if (info.available < bytes)
    throw IoError("not enough disk space in " + dir.string() + ": need " + std::to_string(bytes) + " bytes, have " +
                  std::to_string(info.available));
}

// ---- density snapshots ----------------------------------------------------

struct SnapshotFile {
  GridPtr grid;
  std::size_t stride = 1;
  double t = 0.0;
  std::vector<double> density;
};

inline void write_snapshot(const fs::path& p, const Grid& g, const Snapshot& s, std::size_t stride) {
  detail::BinWriter w(p);
  w.raw(snapshot_magic.data(), snapshot_magic.size());
  detail::write_descriptor(w, g, stride);
  w.put(s.t);
  w.put(static_cast<std::uint64_t>(s.density.size()));
  w.doubles(s.density.data(), s.density.size());
  w.close();
}

inline SnapshotFile read_snapshot(const fs::path& p) {
  detail::BinReader r(p);
  std::array<char, 8> magic{};
  r.raw(magic.data(), magic.size());
  if (magic != snapshot_magic) throw IoError(p.string() + " is not a density snapshot");
  auto d = detail::read_descriptor(r, p);
  SnapshotFile f;
  f.grid = d.grid;
  f.stride = d.stride;
  f.t = r.get<double>();
  const auto n = r.get<std::uint64_t>();
  f.density.resize(static_cast<std::size_t>(n));
  r.doubles(f.density.data(), f.density.size());
  return f;
}

// ---- checkpoints ----------------------------------------------------------

struct Checkpoint {
  WaveField state;
  double t = 0.0;
  std::string plan_hash;
};

inline void write_checkpoint(const fs::path& p, const WaveField& psi, double t, const std::string& plan_hash) {
  ensure_space(p.has_parent_path() ? p.parent_path() : fs::current_path(), psi.size() * 16 + 4096);
  detail::BinWriter w(p);
  w.raw(checkpoint_magic.data(), checkpoint_magic.size());
  detail::write_descriptor(w, psi.grid(), 1);
  w.put(t);
  std::array<char, 64> h{};
  std::memcpy(h.data(), plan_hash.data(), std::min<std::size_t>(plan_hash.size(), h.size()));
  w.raw(h.data(), h.size());
  w.put(static_cast<std::uint64_t>(psi.size()));
  w.doubles(reinterpret_cast<const double*>(psi.values().data()), 2 * psi.size());
  w.close();
}

inline Checkpoint read_checkpoint(const fs::path& p) {
  detail::BinReader r(p);
  std::array<char, 8> magic{};
  r.raw(magic.data(), magic.size());
  if (magic != checkpoint_magic) throw IoError(p.string() + " is not a checkpoint");
  auto d = detail::read_descriptor(r, p);
  Checkpoint c;
  c.t = r.get<double>();
  std::array<char, 64> h{};
  r.raw(h.data(), h.size());
  c.plan_hash.assign(h.data(), strnlen(h.data(), h.size()));
  const auto n = r.get<std::uint64_t>();
  if (n != d.grid->size()) throw IoError(p.string() + ": payload size does not match grid");
  std::vector<cplx> a(static_cast<std::size_t>(n));
  r.doubles(reinterpret_cast<double*>(a.data()), 2 * a.size());
  c.state = WaveField(d.grid, std::move(a));
  return c;
}

// ---- CSV ------------------------------------------------------------------

class CsvWriter {
public:
  CsvWriter(const fs::path& p, const std::vector<std::string>& header) : path_(p), out_(p, std::ios::trunc) {
    if (!out_) throw IoError("cannot open " + p.string() + " for writing");
    row_strings(header);
  }
  void row(const std::vector<double>& v) {
    std::string line;
    for (std::size_t i = 0; i < v.size(); ++i) line += (i ? "," : "") + detail::format_double(v[i]);
    put(line);
  }
  void row_strings(const std::vector<std::string>& v) {
    std::string line;
    for (std::size_t i = 0; i < v.size(); ++i) line += (i ? "," : "") + v[i];
    put(line);
  }
  void close() {
    out_.close();
    if (!out_) throw IoError("close failed on " + path_.string());
  }

private:
  void put(const std::string& line) {
    out_ << line << '\n';
    if (!out_) throw IoError("write failed on " + path_.string());
  }
  fs::path path_;
  std::ofstream out_;
};

inline void write_trajectory_csv(const fs::path& p, const Trajectory& tr) {
  CsvWriter w(p, {"t_au", "norm", "z_au", "pz_au", "energy_au"});
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    w.row({tr.times[i], tr.norm[i], tr.z[i], tr.pz[i], tr.energy[i]});
  w.close();
}

/// Long format: one row per (time, z) with the displacement alongside.
inline void write_density_csv(const fs::path& p, const DensityTrace& d) {
  CsvWriter w(p, {"t_au", "alpha_au", "z_au", "density"});
  for (std::size_t k = 0; k < d.times.size(); ++k)
    for (std::size_t j = 0; j < d.z_axis.size(); ++j) w.row({d.times[k], d.alpha_overlay[k], d.z_axis[j], d.density[k][j]});
  w.close();
}

inline void write_scan_csv(const fs::path& p, const ScanTable& t) {
  CsvWriter w(p, {"theta_rad", "phi_rad", "pz_au", "run_id"});
  for (std::size_t a = 0; a < t.phi_values.size(); ++a)
    for (std::size_t b = 0; b < t.theta_values.size(); ++b)
      w.row_strings({detail::format_double(t.theta_values[b]), detail::format_double(t.phi_values[a]),
                     detail::format_double(t.pz[a][b]), t.run_ids[a][b]});
  w.close();
}

/// Minimal CSV reader for numeric tables written by this library.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw IoError("CSV has no column '" + name + "'");
  }
  std::vector<double> numbers(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(std::stod(r.at(c)));
    return out;
  }
};

inline CsvTable read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = detail::split(line, ',');
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

/// Writes every snapshot of a trajectory plus the P(z, t) CSV; returns the files written.
inline std::vector<fs::path> export_density(const Trajectory& tr, const Grid& g, std::size_t stride,
                                            const fs::path& dir, const std::string& stem = "density") {
  if (tr.snapshots.empty() && tr.density.times.empty()) throw ConfigError("trajectory has no density records");
  fs::create_directories(dir);
  std::uintmax_t bytes = 0;
  for (const auto& s : tr.snapshots) bytes += s.density.size() * 8 + 4096;
  ensure_space(dir, bytes);
  std::vector<fs::path> out;
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%04zu.kssnap", stem.c_str(), i);
    const fs::path p = dir / name;
    write_snapshot(p, g, tr.snapshots[i], stride);
    out.push_back(p);
  }
  if (!tr.density.times.empty()) {
    const fs::path p = dir / (stem + "_z_t.csv");
    write_density_csv(p, tr.density);
    out.push_back(p);
  }
  return out;
}

}  // namespace kickshift
