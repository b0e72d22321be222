// spi: orderings, patterns, simulation, reconstruction, sweeps and benchmarks.
// Exit codes: 0 success, 1 internal failure, 2 bad input.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "spi/counting_new.hpp"
#include "spi/harness.hpp"

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

std::map<std::string, spi::Scheme> scheme_map() {
  std::map<std::string, spi::Scheme> m;
  for (auto s : spi::kAllSchemes) m.emplace(std::string(spi::to_string(s)), s);
  return m;
}

void add_solver_flags(CLI::App* cmd, spi::SolverConfig& cfg) {
  cmd->add_option("--mu", cfg.mu, "Data-fidelity penalty")->capture_default_str();
  cmd->add_option("--beta", cfg.beta, "Splitting penalty")->capture_default_str();
  cmd->add_option("--outer-max", cfg.outer_max, "Outer iterations")->capture_default_str();
  cmd->add_option("--inner-max", cfg.inner_max, "Gradient steps per f-subproblem")->capture_default_str();
  cmd->add_option("--tol", cfg.tol, "Relative-change stopping threshold")->capture_default_str();
  cmd->add_flag("!--no-nonneg", cfg.nonneg, "Disable the nonnegativity clamp");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hadamard single-pixel imaging toolkit"};
  app.require_subcommand(1);
  const auto schemes = scheme_map();
  const std::map<std::string, spi::MeasurementMode> modes{
      {"direct", spi::MeasurementMode::direct}, {"differential", spi::MeasurementMode::complementary_differential}};
  const std::map<std::string, spi::NoiseModel> noises{
      {"none", spi::NoiseModel::none}, {"gaussian", spi::NoiseModel::gaussian}, {"poisson", spi::NoiseModel::poisson}};
  const std::map<std::string, spi::Method> methods{{"linear", spi::Method::linear}, {"tv", spi::Method::tv}};

  // order
  std::string order_scheme;
  unsigned order_k = 0;
  std::string order_out;
  auto* order = app.add_subcommand("order", "Write an ordering as a rank -> serial listing");
  order->add_option("--scheme", order_scheme, "NA, SE, RD, OR, CC or WH")
      ->required()
      ->transform(CLI::IsMember(schemes, CLI::ignore_case));
  order->add_option("--k", order_k, "Order (N = 2^k)")->required();
  order->add_option("--out", order_out, "Output file")->required();

  // patterns
  std::string pat_scheme;
  unsigned pat_k = 0;
  std::size_t pat_count = 1;
  std::string pat_dir;
  std::string pat_format = "p4";
  auto* patterns = app.add_subcommand("patterns", "Dump the first patterns of an ordering as PBM files");
  patterns->add_option("--scheme", pat_scheme)->required()->transform(CLI::IsMember(schemes, CLI::ignore_case));
  patterns->add_option("--k", pat_k, "Even order")->required();
  patterns->add_option("--count", pat_count, "Number of patterns")->capture_default_str();
  patterns->add_option("--out-dir", pat_dir, "Output directory")->required();
  patterns->add_option("--format", pat_format, "p1 (ascii) or p4 (binary)")
      ->check(CLI::IsMember({"p1", "p4"}, CLI::ignore_case))
      ->capture_default_str();

  // simulate
  spi::SimulateOptions sim;
  std::string sim_scheme = "WH", sim_mode = "differential", sim_noise = "none";
  std::string sim_out;
  std::string sim_config;
  auto* simulate = app.add_subcommand("simulate", "Simulate single-pixel measurements");
  simulate->add_option("--config", sim_config, "Experiment config; writes one CSV per grid point");
  simulate->add_option("--image", sim.image, "PGM scene or builtin:glyph64 / builtin:composite64");
  simulate->add_option("--scheme", sim_scheme)->transform(CLI::IsMember(schemes, CLI::ignore_case));
  simulate->add_option("--ratio", sim.ratio, "Sampling ratio M/N")->capture_default_str();
  simulate->add_option("--mode", sim_mode)->transform(CLI::IsMember(modes, CLI::ignore_case));
  simulate->add_option("--noise", sim_noise)->transform(CLI::IsMember(noises, CLI::ignore_case));
  simulate->add_option("--snri", sim.snri_db, "Illumination SNR in dB");
  simulate->add_option("--od", sim.od, "Optical density")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Noise seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "Measurement CSV");

  // reconstruct
  spi::ReconstructOptions rec;
  std::string rec_method = "tv";
  std::string rec_measurements, rec_out, rec_table;
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct an image from a measurement CSV");
  reconstruct->add_option("--measurements", rec_measurements, "Measurement CSV (with .meta sidecar)")->required();
  reconstruct->add_option("--method", rec_method)->transform(CLI::IsMember(methods, CLI::ignore_case));
  reconstruct->add_option("--out", rec_out, "Output PGM")->required();
  reconstruct->add_option("--reference", rec.reference, "Scene used to score PSNR/MSSIM");
  reconstruct->add_option("--table", rec_table, "CSV to append the result row to (default <out>.csv)");
  add_solver_flags(reconstruct, rec.solver);

  // sweep
  std::string sweep_config;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "Run an experiment grid");
  sweep->add_option("--config", sweep_config, "Experiment config (key = value)")->required();
  sweep->add_option("--jobs", jobs, "Concurrent grid points")->check(CLI::PositiveNumber);
  bool sweep_timing = false;
  sweep->add_flag("--timing", sweep_timing, "Also write sweep_timing.csv");

  // bench
  std::vector<unsigned> bench_k{4, 8, 12, 16};
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Time ordering construction and the fast transform");
  bench->add_option("--k", bench_k, "Orders to benchmark (<= 24)")->delimiter(',');
  bench->add_option("--out", bench_out, "Report CSV (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*order) {
      spi::cmd_order(schemes.at(order_scheme), order_k, order_out);
    } else if (*patterns) {
      const auto fmt = (pat_format == "p1" || pat_format == "P1") ? spi::PbmFormat::ascii : spi::PbmFormat::binary;
      spi::cmd_patterns(schemes.at(pat_scheme), pat_k, pat_count, pat_dir, fmt);
    } else if (*simulate) {
      sim.scheme = schemes.at(sim_scheme);
      sim.mode = modes.at(sim_mode);
      sim.noise = noises.at(sim_noise);
      if (!sim_config.empty()) {
        spi::cmd_simulate(spi::read_experiment_config(sim_config));
      } else {
        if (sim.image.empty() || sim_out.empty()) throw spi::InputError("simulate needs --image and --out (or --config)");
        spi::cmd_simulate(sim, sim_out);
      }
    } else if (*reconstruct) {
      rec.method = methods.at(rec_method);
      rec.measurements = rec_measurements;
      rec.out = rec_out;
      rec.table = rec_table;
      spi::cmd_reconstruct(rec);
    } else if (*sweep) {
      auto cfg = spi::read_experiment_config(sweep_config);
      cfg.timing = cfg.timing || sweep_timing;
      const auto outcome = spi::cmd_sweep(cfg, jobs);
      std::size_t failed = 0;
      for (const auto& r : outcome.rows) failed += r.status != "ok";
      if (failed) std::cerr << "spi sweep: " << failed << " grid point(s) failed; see the status column\n";
    } else if (*bench) {
      const auto rows = spi::cmd_bench(bench_k, spi::alloc::probe());
      if (bench_out.empty()) {
        spi::write_bench_csv(std::cout, rows);
      } else {
        auto out = spi::open_output(bench_out);
        spi::write_bench_csv(out, rows);
      }
      for (const auto& r : rows) {
        if (!r.within_bound) {
          std::cerr << "spi bench: " << spi::to_string(r.scheme) << " at k = " << r.k << " used " << r.aux_bytes
                    << " bytes, above the " << r.bound_bytes << " byte bound\n";
          return kExitInternal;
        }
      }
    }
  } catch (const spi::InputError& e) {
    std::cerr << "spi: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "spi: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "spi: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
