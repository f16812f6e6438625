// SPDX-License-Identifier: Apache-2.0
//
// Experiment driver around the one-bit detector library. Subcommands map
// one-to-one onto the runners; `plot` re-renders any produced CSV.
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "obr/csvplot.hpp"
#include "obr/experiments.hpp"

namespace {

struct Overrides {
  std::optional<std::size_t> m, p, n, n_trials, n_draws, n1, n2, threads,
      gamma_points;
  std::optional<double> phi, theta, alpha, pfa_min, tables_tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> rho, snr, splits, out, tables_cache;
};

obr::Vec parse_list(const std::string& text, const char* what) {
  obr::Vec out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? comma : comma - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw obr::ConfigError(std::string(what) + ": bad list entry '" + item +
                             "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw obr::ConfigError(std::string(what) + ": empty list");
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_splits(
    const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? comma : comma - start);
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw obr::ConfigError("--splits entries must look like n1:n2");
    try {
      out.emplace_back(std::stoull(item.substr(0, colon)),
                       std::stoull(item.substr(colon + 1)));
    } catch (const std::exception&) {
      throw obr::ConfigError("--splits: bad entry '" + item + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw obr::ConfigError("--splits: empty list");
  return out;
}

obr::ExperimentConfig resolve_config(const std::string& config_path,
                                     const Overrides& ov) {
  obr::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = obr::load_config(config_path);
  if (!ov.out) {
    const char* env = std::getenv("ONEBIT_RAO_OUT");
    if (env && *env && cfg.output_dir == "out") cfg.output_dir = env;
  }
  if (ov.m) cfg.m = *ov.m;
  if (ov.p) cfg.p = *ov.p;
  if (ov.n) cfg.n = *ov.n;
  if (ov.phi) cfg.phi = *ov.phi;
  if (ov.theta) cfg.theta = *ov.theta;
  if (ov.alpha) cfg.alpha = *ov.alpha;
  if (ov.rho) cfg.rho = parse_list(*ov.rho, "--rho");
  if (ov.snr) cfg.snr_db = parse_list(*ov.snr, "--snr");
  if (ov.n_trials) cfg.n_trials = *ov.n_trials;
  if (ov.n_draws) cfg.n_draws = *ov.n_draws;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.n1) cfg.n1 = *ov.n1;
  if (ov.n2) cfg.n2 = *ov.n2;
  if (ov.splits) cfg.splits = parse_splits(*ov.splits);
  if (ov.out) cfg.output_dir = *ov.out;
  if (ov.threads) cfg.threads = *ov.threads;
  if (ov.gamma_points) cfg.gamma_points = *ov.gamma_points;
  if (ov.pfa_min) cfg.pfa_min = *ov.pfa_min;
  if (ov.tables_tol) cfg.tables_tol = *ov.tables_tol;
  if (ov.tables_cache) cfg.tables_cache = *ov.tables_cache;
  cfg.validate();
  return cfg;
}

void add_common_flags(CLI::App* cmd, std::string* config_path, Overrides* ov) {
  cmd->add_option("--config", *config_path, "JSON config file");
  cmd->add_option("--m", ov->m, "receive elements");
  cmd->add_option("--p", ov->p, "transmit elements");
  cmd->add_option("--n", ov->n, "snapshots per trial");
  cmd->add_option("--phi", ov->phi, "target direction (rad)");
  cmd->add_option("--theta", ov->theta, "steering direction (rad)");
  cmd->add_option("--alpha", ov->alpha, "noise coloring strength");
  cmd->add_option("--rho", ov->rho, "comma list of mismatch levels");
  cmd->add_option("--snr", ov->snr, "comma list of SNR values (dB)");
  cmd->add_option("--n-trials", ov->n_trials, "Monte Carlo trials");
  cmd->add_option("--K", ov->n_draws, "prior draws for averaged Pfa");
  cmd->add_option("--seed", ov->seed, "64-bit seed");
  cmd->add_option("--n1", ov->n1, "training window length");
  cmd->add_option("--n2", ov->n2, "detection window length");
  cmd->add_option("--splits", ov->splits, "comma list of n1:n2 pairs");
  cmd->add_option("--out", ov->out, "output directory");
  cmd->add_option("--threads", ov->threads, "worker count (0 = hardware)");
  cmd->add_option("--gamma-points", ov->gamma_points, "grid size");
  cmd->add_option("--pfa-min", ov->pfa_min, "smallest plotted Pfa");
  cmd->add_option("--tables-tol", ov->tables_tol, "orthant tolerance for tables");
  cmd->add_option("--tables-cache", ov->tables_cache, "pattern table cache dir");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-bit MIMO radar detection experiments"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  CLI::App* c_pfa = app.add_subcommand("pfa", "false alarm rate vs threshold");
  CLI::App* c_avg = app.add_subcommand("avg-pfa",
                                       "prior-averaged false alarm rate");
  CLI::App* c_pd = app.add_subcommand("pd", "detection rate vs threshold");
  CLI::App* c_roc = app.add_subcommand("roc", "ROC against the white baseline");
  CLI::App* c_train = app.add_subcommand("training",
                                         "training window length study");
  for (CLI::App* cmd : {c_pfa, c_avg, c_pd, c_roc, c_train})
    add_common_flags(cmd, &config_path, &ov);

  CLI::App* c_plot = app.add_subcommand("plot", "render a CSV as SVG");
  std::string plot_csv, plot_x, plot_out, plot_title;
  std::vector<std::string> plot_y;
  bool plot_logy = false;
  c_plot->add_option("--csv", plot_csv, "input CSV")->required();
  c_plot->add_option("--x", plot_x, "x column")->required();
  c_plot->add_option("--y", plot_y, "y columns")->required();
  c_plot->add_flag("--logy", plot_logy, "log scale on y");
  c_plot->add_option("--out", plot_out, "output SVG (default: CSV with .svg)");
  c_plot->add_option("--title", plot_title, "plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::vector<std::string> written;
    if (c_plot->parsed()) {
      const obr::CsvTable table = obr::read_csv(plot_csv);
      const obr::Vec x = table.column(plot_x);
      std::vector<obr::PlotSeries> series;
      for (const std::string& y : plot_y)
        series.push_back({y, x, table.column(y)});
      if (plot_out.empty()) {
        plot_out = plot_csv;
        const auto dot = plot_out.rfind('.');
        if (dot != std::string::npos) plot_out.resize(dot);
        plot_out += ".svg";
      }
      obr::write_svg_plot(plot_out, series,
                          {plot_title, plot_x, "", plot_logy});
      written.push_back(plot_out);
    } else {
      const obr::ExperimentConfig cfg = resolve_config(config_path, ov);
      if (c_pfa->parsed()) written = obr::run_pfa(cfg);
      else if (c_avg->parsed()) written = obr::run_avg_pfa(cfg);
      else if (c_pd->parsed()) written = obr::run_pd(cfg);
      else if (c_roc->parsed()) written = obr::run_roc(cfg);
      else if (c_train->parsed()) written = obr::run_training(cfg);
    }
    for (const std::string& path : written) std::printf("%s\n", path.c_str());
  } catch (const obr::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const obr::InvalidArgument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const obr::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  }
  return 0;
}
