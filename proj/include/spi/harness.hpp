#pragma once

// Experiment runner behind the `spi` command line: config parsing, the
// sweep grid, and one function per subcommand.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spi/assets.hpp"
#include "spi/fwht.hpp"
#include "spi/io.hpp"
#include "spi/metrics.hpp"
#include "spi/orderings.hpp"
#include "spi/reconstruct.hpp"
#include "spi/selection_history.hpp"
#include "spi/simulation.hpp"

namespace spi {

namespace fs = std::filesystem;

enum class Method { linear, tv };

inline constexpr std::string_view to_string(Method m) noexcept {
  return m == Method::linear ? "linear" : "tv";
}

inline std::optional<Method> parse_method(std::string_view s) {
  if (s == "linear") return Method::linear;
  if (s == "tv") return Method::tv;
  return std::nullopt;
}

/// Loads a PGM file or a "builtin:<name>" asset and checks it is a valid scene.
inline Image load_scene(const std::string& source) {
  if (source.empty()) throw InputError("no image given");
  Image img;
  if (auto b = assets::builtin(source)) {
    img = std::move(*b);
  } else if (source.rfind(assets::kBuiltinPrefix, 0) == 0) {
    throw InputError("unknown built-in image '" + source + "'");
  } else {
    img = read_pgm(fs::path(source));
  }
  try {
    scene_order(img);
  } catch (const std::invalid_argument& e) {
    throw InputError(source + ": " + e.what());
  }
  return img;
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct ExperimentConfig {
  std::string image;
  std::vector<Scheme> schemes{Scheme::WH};
  std::vector<double> ratios{0.125};
  MeasurementMode mode = MeasurementMode::complementary_differential;
  NoiseModel noise = NoiseModel::none;
  std::vector<double> snri_db{std::numeric_limits<double>::infinity()};
  double od = 0.0;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::tv};
  SolverConfig solver;
  std::string output_dir = "out";
  bool save_images = false;
  /// Also write sweep_timing.csv.
  bool timing = false;

  void validate() const {
    if (image.empty()) throw InputError("config: image is empty");
    if (output_dir.empty()) throw InputError("config: output_dir is empty");
    if (schemes.empty()) throw InputError("config: no schemes");
    if (ratios.empty()) throw InputError("config: no ratios");
    if (methods.empty()) throw InputError("config: no methods");
    for (double r : ratios) {
      if (!(r > 0.0 && r <= 1.0)) throw InputError("config: ratio " + format_double(r) + " outside (0, 1]");
    }
    if (noise != NoiseModel::none) {
      if (snri_db.empty()) throw InputError("config: noise needs snri_db values");
      for (double s : snri_db) {
        if (!std::isfinite(s)) throw InputError("config: snri_db must be finite when noise is on");
      }
    }
    if (!(od >= 0.0) || !std::isfinite(od)) throw InputError("config: od must be finite and >= 0");
    try {
      solver.validate();
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("config: ") + e.what());
    }
  }
};

namespace detail {

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& text, std::string_view key, Parse parse) {
  std::vector<T> out;
  for (const auto& item : split(text, ',')) {
    const auto t = trim(item);
    if (t.empty()) continue;
    out.push_back(parse(std::string(t), key));
  }
  if (out.empty()) throw InputError("config: '" + std::string(key) + "' is empty");
  return out;
}

inline bool parse_bool(std::string_view s, std::string_view key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InputError("config: '" + std::string(key) + "' expects true/false, got '" + std::string(s) + "'");
}

}  // namespace detail

/// Builds a config from key = value pairs. Unknown keys are rejected.
inline ExperimentConfig parse_experiment_config(const KeyValues& kv) {
  ExperimentConfig cfg;
  bool snri_given = false;
  for (const auto& [key, value] : kv) {
    if (key == "image") {
      cfg.image = value;
    } else if (key == "schemes") {
      cfg.schemes = detail::parse_list<Scheme>(value, key, [](const std::string& s, std::string_view) {
        auto p = parse_scheme(s);
        if (!p) throw InputError("config: unknown scheme '" + s + "'");
        return *p;
      });
    } else if (key == "ratios") {
      cfg.ratios = detail::parse_list<double>(value, key, [](const std::string& s, std::string_view k) {
        return parse_double(s, k);
      });
    } else if (key == "mode") {
      auto m = parse_mode(value);
      if (!m) throw InputError("config: unknown mode '" + value + "'");
      cfg.mode = *m;
    } else if (key == "noise") {
      auto n = parse_noise_model(value);
      if (!n) throw InputError("config: unknown noise model '" + value + "'");
      cfg.noise = *n;
    } else if (key == "snri_db") {
      snri_given = true;
      cfg.snri_db = detail::parse_list<double>(value, key, [](const std::string& s, std::string_view k) {
        return parse_double(s, k);
      });
    } else if (key == "od") {
      cfg.od = parse_double(value, key);
    } else if (key == "seed") {
      cfg.seed = parse_integer<std::uint64_t>(value, key);
    } else if (key == "methods") {
      cfg.methods = detail::parse_list<Method>(value, key, [](const std::string& s, std::string_view) {
        auto m = parse_method(s);
        if (!m) throw InputError("config: unknown method '" + s + "'");
        return *m;
      });
    } else if (key == "mu") {
      cfg.solver.mu = parse_double(value, key);
    } else if (key == "beta") {
      cfg.solver.beta = parse_double(value, key);
    } else if (key == "outer_max") {
      cfg.solver.outer_max = parse_integer<int>(value, key);
    } else if (key == "inner_max") {
      cfg.solver.inner_max = parse_integer<int>(value, key);
    } else if (key == "tol") {
      cfg.solver.tol = parse_double(value, key);
    } else if (key == "nonneg") {
      cfg.solver.nonneg = detail::parse_bool(value, key);
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "save_images") {
      cfg.save_images = detail::parse_bool(value, key);
    } else if (key == "timing") {
      cfg.timing = detail::parse_bool(value, key);
    } else {
      throw InputError("config: unknown key '" + key + "'");
    }
  }
  if (cfg.noise == NoiseModel::none && !snri_given) {
    cfg.snri_db = {std::numeric_limits<double>::infinity()};
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig read_experiment_config(const fs::path& path) {
  return parse_experiment_config(read_key_values(path));
}

// ---------------------------------------------------------------------------
// Sweep

struct SweepRow {
  Scheme scheme = Scheme::NA;
  unsigned k = 0;
  double sampling_ratio = 0.0;
  std::size_t samples = 0;
  MeasurementMode mode = MeasurementMode::direct;
  NoiseModel noise = NoiseModel::none;
  double snri_db = std::numeric_limits<double>::infinity();
  double od = 0.0;
  Method method = Method::tv;
  double psnr_db = std::numeric_limits<double>::quiet_NaN();
  double mssim = std::numeric_limits<double>::quiet_NaN();
  double recon_seconds = 0.0;
  int outer_iters = 0;
  std::string status = "ok";
};

inline constexpr std::string_view kSweepHeader =
    "scheme,k,sampling_ratio,samples,mode,noise,snri_db,od,method,psnr_db,mssim,outer_iters,status";
inline constexpr std::string_view kTimingHeader = "scheme,k,sampling_ratio,snri_db,method,recon_seconds";

/// RFC 4180 field quoting.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Timing is excluded so that the table is byte-stable; see write_timing_csv.
inline void write_sweep_row(std::ostream& out, const SweepRow& r) {
  out << to_string(r.scheme) << ',' << r.k << ',' << format_double(r.sampling_ratio) << ',' << r.samples
      << ',' << to_string(r.mode) << ',' << to_string(r.noise) << ',' << format_double(r.snri_db) << ','
      << format_double(r.od) << ',' << to_string(r.method) << ',' << format_double(r.psnr_db) << ','
      << format_double(r.mssim) << ',' << r.outer_iters << ',' << csv_field(r.status) << "\r\n";
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << "\r\n";
  for (const auto& r : rows) write_sweep_row(out, r);
}

inline void write_timing_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kTimingHeader << "\r\n";
  for (const auto& r : rows) {
    out << to_string(r.scheme) << ',' << r.k << ',' << format_double(r.sampling_ratio) << ','
        << format_double(r.snri_db) << ',' << to_string(r.method) << ',' << format_double(r.recon_seconds)
        << "\r\n";
  }
}

/// Reads a table written by write_sweep_csv back into rows.
inline std::vector<SweepRow> read_sweep_csv(std::istream& in, const std::string& name = "sweep") {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kSweepHeader) throw InputError(name + ": bad header");
  std::vector<SweepRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const std::string where = name + " line " + std::to_string(line_no);
    // Only the trailing status field may be quoted.
    std::vector<std::string> fields;
    const auto quote = body.find('"');
    if (quote == std::string_view::npos) {
      fields = split(body, ',');
    } else {
      fields = split(body.substr(0, quote), ',');
      fields.pop_back();
      std::string status;
      for (std::size_t i = quote + 1; i < body.size(); ++i) {
        if (body[i] == '"') {
          if (i + 1 < body.size() && body[i + 1] == '"') {
            status += '"';
            ++i;
          } else {
            break;
          }
        } else {
          status += body[i];
        }
      }
      fields.push_back(status);
    }
    if (fields.size() != 13) throw InputError(where + ": expected 13 fields");
    SweepRow r;
    const auto scheme = parse_scheme(fields[0]);
    const auto mode = parse_mode(fields[4]);
    const auto noise = parse_noise_model(fields[5]);
    const auto method = parse_method(fields[8]);
    if (!scheme || !mode || !noise || !method) throw InputError(where + ": unknown enum value");
    r.scheme = *scheme;
    r.k = parse_integer<unsigned>(fields[1], where);
    r.sampling_ratio = parse_double(fields[2], where);
    r.samples = parse_integer<std::size_t>(fields[3], where);
    r.mode = *mode;
    r.noise = *noise;
    r.snri_db = parse_double(fields[6], where);
    r.od = parse_double(fields[7], where);
    r.method = *method;
    r.psnr_db = fields[9] == "nan" ? std::numeric_limits<double>::quiet_NaN() : parse_double(fields[9], where);
    r.mssim = fields[10] == "nan" ? std::numeric_limits<double>::quiet_NaN() : parse_double(fields[10], where);
    r.outer_iters = parse_integer<int>(fields[11], where);
    r.status = fields[12];
    rows.push_back(std::move(r));
  }
  return rows;
}

/// SplitMix64 finalizer, used to derive independent per-point seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Noise seed for one (scheme, ratio) cell of the grid. SNR levels and
/// methods within a cell share the seed, so they see the same noise draws.
inline std::uint64_t point_seed(std::uint64_t base, std::size_t scheme_index, std::size_t ratio_index) {
  return mix_seed(mix_seed(base ^ (scheme_index + 1)) ^ (ratio_index + 1));
}

inline std::string point_stem(const SweepRow& r) {
  std::string s = std::string(to_string(r.scheme)) + "_r" + format_double(r.sampling_ratio);
  if (r.noise != NoiseModel::none) s += "_snri" + format_double(r.snri_db);
  return s;
}

inline ReconstructionResult run_method(Method method, const MeasurementSet& m, const SolverConfig& cfg) {
  return method == Method::linear ? linear_reconstruct(m) : tv_reconstruct(m, cfg);
}

struct SweepOutcome {
  std::vector<SweepRow> rows;
  /// Reconstructed images in row order; empty where the point failed.
  std::vector<Image> images;
};

/// Executes the full grid (scheme x ratio x snri x method). Grid points run
/// on up to `jobs` threads; rows come back in grid order regardless.
inline SweepOutcome run_sweep(const ExperimentConfig& cfg, unsigned jobs = 1) {
  cfg.validate();
  const Image scene = load_scene(cfg.image);
  const unsigned k = scene_order(scene);

  struct Point {
    std::size_t scheme_index, ratio_index, snri_index;
  };
  std::vector<Point> points;
  for (std::size_t s = 0; s < cfg.schemes.size(); ++s) {
    for (std::size_t r = 0; r < cfg.ratios.size(); ++r) {
      for (std::size_t n = 0; n < cfg.snri_db.size(); ++n) points.push_back({s, r, n});
    }
  }
  const std::size_t per_point = cfg.methods.size();
  SweepOutcome out;
  out.rows.resize(points.size() * per_point);
  out.images.resize(points.size() * per_point);

  auto run_point = [&](std::size_t index) {
    const Point& p = points[index];
    SweepRow base;
    base.scheme = cfg.schemes[p.scheme_index];
    base.k = k;
    base.sampling_ratio = cfg.ratios[p.ratio_index];
    base.mode = cfg.mode;
    base.noise = cfg.noise;
    base.snri_db = cfg.noise == NoiseModel::none ? std::numeric_limits<double>::infinity()
                                                 : cfg.snri_db[p.snri_index];
    base.od = cfg.od;
    for (std::size_t j = 0; j < per_point; ++j) {
      out.rows[index * per_point + j] = base;
      out.rows[index * per_point + j].method = cfg.methods[j];
    }
    MeasurementSet m;
    try {
      MeasurementPlan plan;
      plan.ordering = cached_ordering(base.scheme, k);
      plan.sample_count = samples_for_ratio(base.sampling_ratio, plan.ordering->size());
      plan.mode = cfg.mode;
      NoiseSpec noise{cfg.noise, base.snri_db, point_seed(cfg.seed, p.scheme_index, p.ratio_index), cfg.od};
      m = measure(scene, plan, noise);
    } catch (const std::exception& e) {
      for (std::size_t j = 0; j < per_point; ++j) out.rows[index * per_point + j].status = e.what();
      return;
    }
    for (std::size_t j = 0; j < per_point; ++j) {
      auto& row = out.rows[index * per_point + j];
      row.samples = m.plan.sample_count;
      try {
        auto res = run_method(row.method, m, cfg.solver);
        const auto q = evaluate_quality(scene, res.image);
        row.psnr_db = q.psnr_db;
        row.mssim = q.mssim;
        row.outer_iters = res.outer_iters;
        row.recon_seconds = res.wall_seconds;
        out.images[index * per_point + j] = std::move(res.image);
      } catch (const std::exception& e) {
        row.status = e.what();
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) run_point(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < points.size(); i = next++) run_point(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns normally on success and throws InputError for
// bad input; anything else is an internal failure.

inline std::shared_ptr<const OrderingPermutation> checked_ordering(Scheme scheme, unsigned k) {
  try {
    return cached_ordering(scheme, k);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

inline void cmd_order(Scheme scheme, unsigned k, const fs::path& out_path) {
  const auto p = checked_ordering(scheme, k);
  auto out = open_output(out_path);
  write_permutation(out, *p);
}

inline constexpr std::string_view kPatternReadme =
    "Patterns are Hadamard basis rows reshaped row-major into square grids.\n"
    "Pixel convention: +1 is written white (PBM bit 0), -1 black (PBM bit 1).\n"
    "File names: pattern_<rank>_s<serial>.pbm, rank and serial both 1-based.\n";

inline std::vector<fs::path> cmd_patterns(Scheme scheme, unsigned k, std::size_t count, const fs::path& out_dir,
                                          PbmFormat format = PbmFormat::binary) {
  if (k % 2 != 0) throw InputError("patterns need an even order, got k = " + std::to_string(k));
  const auto p = checked_ordering(scheme, k);
  if (count < 1 || count > p->size()) {
    throw InputError("pattern count " + std::to_string(count) + " outside [1, " + std::to_string(p->size()) + "]");
  }
  fs::create_directories(out_dir);
  const int width = static_cast<int>(std::to_string(p->size()).size());
  std::vector<fs::path> files;
  for (std::size_t r = 0; r < count; ++r) {
    const SerialNumber serial(p->ranks[r], k);
    const auto pattern = history_to_pattern(serial_to_history(serial));
    std::ostringstream name;
    name << "pattern_" << std::setw(width) << std::setfill('0') << (r + 1) << "_s" << p->ranks[r] << ".pbm";
    const auto path = out_dir / name.str();
    auto out = open_output(path);
    write_pbm(out, pattern.cells, format);
    files.push_back(path);
  }
  auto readme = open_output(out_dir / "README.txt");
  readme << kPatternReadme;
  return files;
}

struct SimulateOptions {
  std::string image;
  Scheme scheme = Scheme::WH;
  double ratio = 0.125;
  MeasurementMode mode = MeasurementMode::complementary_differential;
  NoiseModel noise = NoiseModel::none;
  double snri_db = std::numeric_limits<double>::infinity();
  double od = 0.0;
  std::uint64_t seed = 1;
};

inline MeasurementSet simulate(const Image& scene, const SimulateOptions& opt) {
  if (opt.noise != NoiseModel::none && !std::isfinite(opt.snri_db)) {
    throw InputError("noise model '" + std::string(to_string(opt.noise)) + "' needs --snri");
  }
  if (!(opt.ratio > 0.0 && opt.ratio <= 1.0)) throw InputError("ratio must be in (0, 1]");
  if (!(opt.od >= 0.0) || !std::isfinite(opt.od)) throw InputError("od must be finite and >= 0");
  const unsigned k = scene_order(scene);
  MeasurementPlan plan;
  plan.ordering = checked_ordering(opt.scheme, k);
  plan.sample_count = samples_for_ratio(opt.ratio, plan.ordering->size());
  plan.mode = opt.mode;
  const double snri = opt.noise == NoiseModel::none ? std::numeric_limits<double>::infinity() : opt.snri_db;
  try {
    return measure(scene, plan, NoiseSpec{opt.noise, snri, opt.seed, opt.od});
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

inline void cmd_simulate(const SimulateOptions& opt, const fs::path& out_csv) {
  const auto m = simulate(load_scene(opt.image), opt);
  write_measurements(out_csv, m);
}

/// Config form: one measurement CSV per (scheme, ratio, snri) grid point,
/// seeded exactly as run_sweep seeds them.
inline std::vector<fs::path> cmd_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  const Image scene = load_scene(cfg.image);
  std::vector<fs::path> files;
  for (std::size_t s = 0; s < cfg.schemes.size(); ++s) {
    for (std::size_t r = 0; r < cfg.ratios.size(); ++r) {
      for (double snri : cfg.snri_db) {
        SimulateOptions opt{cfg.image, cfg.schemes[s], cfg.ratios[r], cfg.mode, cfg.noise, snri, cfg.od,
                            point_seed(cfg.seed, s, r)};
        SweepRow tag;
        tag.scheme = opt.scheme;
        tag.sampling_ratio = opt.ratio;
        tag.noise = opt.noise;
        tag.snri_db = snri;
        const auto path = fs::path(cfg.output_dir) / (point_stem(tag) + ".csv");
        write_measurements(path, simulate(scene, opt));
        files.push_back(path);
      }
    }
  }
  return files;
}

struct ReconstructOptions {
  fs::path measurements;
  Method method = Method::tv;
  fs::path out;
  /// Scene to score against; without it psnr/mssim are reported as nan.
  std::string reference;
  /// Table the SweepRow is appended to; defaults to "<out>.csv".
  fs::path table;
  SolverConfig solver;
};

inline SweepRow cmd_reconstruct(const ReconstructOptions& opt) {
  if (!fs::exists(opt.measurements)) throw InputError("measurement file '" + opt.measurements.string() + "' not found");
  const auto m = read_measurements(opt.measurements);
  try {
    opt.solver.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (m.plan.ordering->order % 2 != 0) throw InputError("reconstruction needs an even order");
  const auto res = run_method(opt.method, m, opt.solver);
  write_pgm(opt.out, res.image);

  SweepRow row;
  row.scheme = m.plan.ordering->scheme;
  row.k = m.plan.ordering->order;
  row.sampling_ratio = m.plan.ratio();
  row.samples = m.plan.sample_count;
  row.mode = m.plan.mode;
  row.noise = m.noise.model;
  row.snri_db = m.noise.snri_db;
  row.od = m.noise.od;
  row.method = opt.method;
  row.outer_iters = res.outer_iters;
  row.recon_seconds = res.wall_seconds;
  if (!opt.reference.empty()) {
    const auto ref = load_scene(opt.reference);
    if (!ref.same_shape(res.image)) throw InputError("reference image shape differs from reconstruction");
    const auto q = evaluate_quality(ref, res.image);
    row.psnr_db = q.psnr_db;
    row.mssim = q.mssim;
  }
  auto table = opt.table;
  if (table.empty()) {
    table = opt.out;
    table += ".csv";
  }
  const bool fresh = !fs::exists(table) || fs::file_size(table) == 0;
  if (table.has_parent_path()) fs::create_directories(table.parent_path());
  std::ofstream out(table, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot write '" + table.string() + "'");
  if (fresh) out << kSweepHeader << "\r\n";
  write_sweep_row(out, row);
  return row;
}

/// Runs the grid and writes sweep.csv and, if asked, sweep_timing.csv and
/// images/<scheme>_r<ratio>[_snri<db>]_<method>.pgm under cfg.output_dir.
inline SweepOutcome cmd_sweep(const ExperimentConfig& cfg, unsigned jobs) {
  auto outcome = run_sweep(cfg, jobs);
  const fs::path dir(cfg.output_dir);
  {
    auto out = open_output(dir / "sweep.csv");
    write_sweep_csv(out, outcome.rows);
  }
  if (cfg.timing) {
    auto out = open_output(dir / "sweep_timing.csv");
    write_timing_csv(out, outcome.rows);
  }
  if (cfg.save_images) {
    for (std::size_t i = 0; i < outcome.rows.size(); ++i) {
      if (outcome.images[i].empty()) continue;
      const auto& r = outcome.rows[i];
      write_pgm(dir / "images" / (point_stem(r) + "_" + std::string(to_string(r.method)) + ".pgm"),
                outcome.images[i]);
    }
  }
  return outcome;
}

// ---------------------------------------------------------------------------
// Benchmark

/// Optional hooks onto an allocation counter; see spi/counting_new.hpp.
struct MemoryProbe {
  std::function<void()> reset_peak;
  std::function<std::size_t()> peak_bytes;
  std::function<std::size_t()> current_bytes;

  bool available() const { return reset_peak && peak_bytes && current_bytes; }
};

struct BenchRow {
  Scheme scheme = Scheme::NA;
  unsigned k = 0;
  std::size_t n = 0;
  double construct_seconds = 0.0;
  double fwht_seconds = 0.0;
  /// Peak bytes allocated above the baseline while building the ordering;
  /// 0 when no probe is installed.
  std::size_t aux_bytes = 0;
  /// 64 N, the O(N) budget.
  std::size_t bound_bytes = 0;
  bool within_bound = true;
};

inline constexpr unsigned kMaxBenchOrder = 24;

inline std::vector<BenchRow> cmd_bench(const std::vector<unsigned>& orders, const MemoryProbe& probe = {}) {
  for (unsigned k : orders) {
    if (k < 1 || k > kMaxBenchOrder) {
      throw InputError("bench order k = " + std::to_string(k) + " outside [1, " + std::to_string(kMaxBenchOrder) + "]");
    }
  }
  std::vector<BenchRow> rows;
  for (unsigned k : orders) {
    const std::size_t n = std::size_t{1} << k;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i % 7) - 3.0;
    const auto t0 = std::chrono::steady_clock::now();
    fwht_in_place(std::span<double>(v));
    const double fwht_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (Scheme s : kAllSchemes) {
      if (needs_square(s) && k % 2 != 0) continue;
      BenchRow row{s, k, n};
      row.fwht_seconds = fwht_s;
      row.bound_bytes = 64 * n;
      std::size_t baseline = 0;
      if (probe.available()) {
        baseline = probe.current_bytes();
        probe.reset_peak();
      }
      const auto t1 = std::chrono::steady_clock::now();
      {
        const auto p = make_ordering(s, k);
        row.construct_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
      }
      if (probe.available()) {
        const auto peak = probe.peak_bytes();
        row.aux_bytes = peak > baseline ? peak - baseline : 0;
        row.within_bound = row.aux_bytes < row.bound_bytes;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "scheme,k,N,construct_seconds,fwht_seconds,aux_bytes,bound_bytes,within_bound\r\n";
  for (const auto& r : rows) {
    out << to_string(r.scheme) << ',' << r.k << ',' << r.n << ',' << format_double(r.construct_seconds) << ','
        << format_double(r.fwht_seconds) << ',' << r.aux_bytes << ',' << r.bound_bytes << ','
        << (r.within_bound ? "true" : "false") << "\r\n";
  }
}

}  // namespace spi
