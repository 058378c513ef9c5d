// Command-line workbench: synthesis, variance calibration, change-point
// detection, figures, and complexity benchmarks.
//
// Exit codes: 0 success, 2 input/validation error, 3 runtime/precondition
// error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fdpv/common.hpp"
#include "fdpv/detector.hpp"
#include "fdpv/fgn.hpp"
#include "fdpv/io.hpp"
#include "fdpv/ibs.hpp"
#include "fdpv/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

long peak_rss_kb() {
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream ss(line.substr(6));
      long kb = 0;
      ss >> kb;
      return kb;
    }
  }
  return -1;
}

std::string sibling(const std::string& base, const std::string& suffix) {
  fs::path p(base);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

std::vector<double> default_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 19; ++i) g.push_back(i * 0.05);
  return g;
}

void write_text(const std::string& filename, const std::string& text) {
  std::ofstream out(filename);
  if (!out) throw std::runtime_error("cannot write '" + filename + "'");
  out << text;
}

// A --config JSON file supplies defaults for the long option names; values
// given on the command line win. Applied before parsing by injecting the
// option only when absent from argv.
void apply_config_defaults(CLI::App& app, const std::string& config_path) {
  json doc;
  try {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config '" + config_path + "'");
    in >> doc;
  } catch (const json::exception& e) {
    throw fdpv::io::ParseError(config_path + ": " + e.what());
  }
  for (auto& [key, value] : doc.items()) {
    CLI::Option* opt = app.get_option_no_throw("--" + key);
    if (!opt) throw fdpv::io::ParseError(config_path + ": unknown option '" + key + "'");
    if (opt->count() > 0) continue;  // command line overrides file
    std::string text = value.is_string() ? value.get<std::string>() : value.dump();
    opt->add_result(text);
    opt->run_callback();
  }
}

struct DetectCli {
  std::string data_file, table_file, config_file, out_file = "report.json";
  fdpv::DetectorConfig det;
  double threshold_override = -1.0;
  bool plot = false;
  std::string calib_mode = "mc";
  int calib_replicates = 400;
  long calib_n = 8192;
};

fdpv::VarianceTable load_or_build_table(const DetectCli& cli) {
  std::string path = cli.table_file;
  if (path.empty()) {
    const char* cache = std::getenv("FDPV_CACHE_DIR");
    const fs::path dir = cache ? fs::path(cache)
                               : fs::path(cli.out_file).parent_path();
    std::ostringstream name;
    name << "variance_" << cli.calib_mode << "_n" << cli.calib_n << "_r"
         << cli.calib_replicates << "_s" << cli.det.seed << ".json";
    path = (dir / name.str()).string();
  }
  if (fs::exists(path)) return fdpv::io::read_variance_table(path);

  std::cerr << "variance table '" << path << "' missing; calibrating ("
            << cli.calib_mode << ")...\n";
  fdpv::VarianceCalibConfig cfg;
  cfg.mode = cli.calib_mode;
  cfg.series_length = cli.calib_n;
  cfg.replicates = cli.calib_replicates;
  cfg.seed = cli.det.seed;
  fdpv::VarianceTable table = fdpv::calibrate_variance(default_grid(), cfg);
  fdpv::io::write_variance_table(path, table);
  std::cerr << "wrote " << path << "\n";
  return table;
}

int cmd_synth(const std::string& model_file, std::uint64_t seed, const std::string& out) {
  fdpv::PiecewiseModel model = fdpv::io::read_model_json(model_file);
  fdpv::PiecewisePath path = fdpv::simulate_piecewise_fbm(model, seed);
  fdpv::io::write_path_csv(out, path.values, seed);
  fdpv::io::write_truth_json(sibling(out, ".truth.json"), model, path.change_indices);
  std::cout << "wrote " << out << " (" << path.values.size() << " samples, "
            << path.change_indices.size() << " change points)\n";
  return 0;
}

int cmd_detect(DetectCli& cli) {
  Eigen::ArrayXd path = fdpv::io::read_path_csv(cli.data_file);
  if (path.size() == 0)
    throw fdpv::io::ParseError(cli.data_file + ": no data rows");
  if (cli.threshold_override >= 0.0) cli.det.threshold_override = cli.threshold_override;
  try {
    cli.det.validate(path.size());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(e.what());  // precondition, not input parse: exit 3
  }
  fdpv::VarianceTable table = load_or_build_table(cli);

  fdpv::ChangePointReport report = fdpv::detect(path, cli.det, table);
  fdpv::io::write_report(cli.out_file, report);
  std::cout << "K_hat=" << report.retained.size() << " threshold="
            << report.threshold_used << " -> " << cli.out_file << "\n";
  if (cli.plot) {
    fdpv::FilteredDerivativeTrace trace = fdpv::filtered_derivative(path, cli.det.window);
    const std::string fig = sibling(cli.out_file, ".svg");
    write_text(fig, fdpv::svg::detection_figure(path, trace, report));
    std::cout << "wrote " << fig << "\n";
  }
  return 0;
}

int cmd_calibrate(const fdpv::VarianceCalibConfig& cfg, const std::vector<double>& grid,
                  const std::string& out) {
  std::vector<double> g = grid.empty() ? default_grid() : grid;
  std::cerr << "calibrating sigma^2(H) on " << g.size() << " grid points, mode "
            << cfg.mode << "\n";
  fdpv::VarianceTable table = fdpv::calibrate_variance(g, cfg);
  for (const auto& [h, s2] : table.grid)
    std::cerr << "  H=" << h << " sigma^2=" << s2 << "\n";
  fdpv::io::write_variance_table(out, table);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_bench(const std::vector<long>& sizes, Eigen::Index window, double threshold,
              int runs, const std::string& out, bool plot) {
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] <= sizes[i - 1])
      throw std::invalid_argument("bench: sizes must be ascending");

  fdpv::VarianceTable table;  // threshold is fixed, so only the lookup shape matters
  table.mode = "mc";
  table.grid = {{0.1, 0.18}, {0.9, 0.18}};

  std::ofstream csv(out);
  if (!csv) throw std::runtime_error("cannot write '" + out + "'");
  csv << "size,run,detect_ms,peak_rss_kb\n";
  std::vector<std::pair<double, double>> size_time;
  for (long n : sizes) {
    Eigen::ArrayXd path = fdpv::simulate_fbm(0.5, 1.0, n, 4242);  // excluded from timing
    std::vector<double> times;
    for (int r = 0; r < runs; ++r) {
      fdpv::DetectorConfig cfg;
      cfg.window = window;
      cfg.threshold_override = threshold;
      fdpv::ChangePointReport rep = fdpv::detect(path, cfg, table);
      times.push_back(rep.detection_ms);
      csv << n << "," << r << "," << rep.detection_ms << "," << peak_rss_kb() << "\n";
    }
    std::sort(times.begin(), times.end());
    size_time.emplace_back(static_cast<double>(n), times[times.size() / 2]);
    std::cerr << "n=" << n << " median detect " << times[times.size() / 2] << " ms\n";
  }
  std::cout << "wrote " << out << "\n";
  if (plot) {
    const std::string fig = sibling(out, ".svg");
    write_text(fig, fdpv::svg::bench_figure(size_time));
    std::cout << "wrote " << fig << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Change-point analysis on the Hurst index of piecewise "
               "fractional Brownian motion"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "simulate a piecewise fBm from a model file");
  std::string model_file, synth_out = "path.csv";
  std::uint64_t synth_seed = 0;
  synth->add_option("--model", model_file, "model JSON file")->required();
  synth->add_option("--seed", synth_seed, "master seed");
  synth->add_option("--out", synth_out, "output CSV path");

  // detect
  auto* det = app.add_subcommand("detect", "two-step change-point detection");
  DetectCli dc;
  det->add_option("--data", dc.data_file, "input series CSV")->required();
  det->add_option("--table", dc.table_file, "variance table JSON");
  det->add_option("--config", dc.config_file, "JSON file with option defaults");
  det->add_option("--out", dc.out_file, "report JSON path");
  det->add_option("-A,--window", dc.det.window, "sliding window A");
  det->add_option("--p1", dc.det.p1_star, "Step-1 level");
  det->add_option("--p2", dc.det.p2_star, "Step-2 level");
  det->add_option("--threshold-mode", dc.det.threshold_mode, "mc|gaussian");
  det->add_option("--threshold", dc.threshold_override, "fixed Step-1 threshold");
  det->add_option("--replicates", dc.det.mc_replicates, "mc calibration replicates");
  det->add_option("--min-separation", dc.det.min_separation, "candidate spacing");
  det->add_option("--seed", dc.det.seed, "calibration seed");
  det->add_flag("--plot", dc.plot, "emit a two-panel SVG beside the report");
  det->add_option("--calib-mode", dc.calib_mode, "auto-calibration mode");
  det->add_option("--calib-replicates", dc.calib_replicates, "auto-calibration replicates");
  det->add_option("--calib-n", dc.calib_n, "auto-calibration series length");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "estimate sigma^2(H) on a grid");
  fdpv::VarianceCalibConfig cal_cfg;
  std::vector<double> cal_grid;
  std::string cal_out = "variance_table.json";
  cal->add_option("--grid", cal_grid, "hurst grid points (default 0.05..0.95)");
  cal->add_option("--mode", cal_cfg.mode, "mc|sum");
  cal->add_option("--n", cal_cfg.series_length, "mc series length");
  cal->add_option("--replicates", cal_cfg.replicates, "mc replicates");
  cal->add_option("--truncation", cal_cfg.truncation, "sum lag cutoff J");
  cal->add_option("--pool", cal_cfg.pool_size, "sum Monte-Carlo pool size");
  cal->add_option("--seed", cal_cfg.seed, "seed");
  cal->add_option("--out", cal_out, "output table JSON");

  // plot-lambda
  auto* pl = app.add_subcommand("plot-lambda", "plot the link function");
  std::string pl_out = "lambda.svg";
  pl->add_option("--out", pl_out, "output SVG");

  // bench
  auto* bench = app.add_subcommand("bench", "linear-complexity benchmark");
  std::vector<long> bench_sizes{1 << 20, 1 << 21};
  long bench_window = 2000;
  double bench_threshold = 0.05;
  int bench_runs = 5;
  std::string bench_out = "bench.csv";
  bool bench_plot = false;
  bench->add_option("--sizes", bench_sizes, "ascending series lengths");
  bench->add_option("-A,--window", bench_window, "sliding window A");
  bench->add_option("--threshold", bench_threshold, "fixed Step-1 threshold");
  bench->add_option("--runs", bench_runs, "repetitions per size");
  bench->add_option("--out", bench_out, "output CSV");
  bench->add_flag("--plot", bench_plot, "emit a log-log SVG beside the CSV");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 2;
    }
    if (det->parsed() && !dc.config_file.empty()) {
      apply_config_defaults(*det, dc.config_file);
    }

    if (synth->parsed()) return cmd_synth(model_file, synth_seed, synth_out);
    if (det->parsed()) return cmd_detect(dc);
    if (cal->parsed()) return cmd_calibrate(cal_cfg, cal_grid, cal_out);
    if (pl->parsed()) {
      write_text(pl_out, fdpv::svg::lambda_figure());
      std::cout << "wrote " << pl_out << "\n";
      return 0;
    }
    if (bench->parsed())
      return cmd_bench(bench_sizes, bench_window, bench_threshold, bench_runs,
                       bench_out, bench_plot);
  } catch (const fdpv::io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
