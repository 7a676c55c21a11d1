#include "cbpsk/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>
#include <variant>

#include "cbpsk/optimizer.hpp"

namespace cbpsk::cli {

namespace {

using Cell = std::variant<std::monostate, double, std::int64_t, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct CommonOptions {
  std::string output = "csv";
  std::string out_path;
  std::uint64_t seed = 0;
  unsigned shards = 1;
};

std::string render_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        else if constexpr (std::is_same_v<T, double>) return format_double(v);
        else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else return v;
      },
      cell);
}

nlohmann::ordered_json cell_json(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
          return v;
        } else return v;
      },
      cell);
}

std::string render_csv(const Table& table) {
  std::string text;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) text += ',';
    text += table.columns[i];
  }
  text += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ',';
      text += render_cell(row[i]);
    }
    text += '\n';
  }
  return text;
}

std::string render_json(const Table& table, const std::string& command,
                        const nlohmann::ordered_json& config, const CommonOptions& common,
                        const nlohmann::ordered_json& extra = nullptr) {
  nlohmann::ordered_json doc;
  doc["metadata"] = {{"tool", "cbpsk"},
                     {"version", kToolVersion},
                     {"command", command},
                     {"seed", common.seed},
                     {"config", config}};
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json object;
    for (std::size_t i = 0; i < row.size(); ++i) object[table.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(object));
  }
  doc["rows"] = std::move(rows);
  if (!extra.is_null()) {
    for (const auto& [key, value] : extra.items()) doc[key] = value;
  }
  return doc.dump(2) + "\n";
}

void emit(const std::string& text, const CommonOptions& common, std::ostream& out) {
  if (common.out_path.empty()) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream file(common.out_path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open output file " + common.out_path);
  file << text;
}

void add_common(CLI::App* cmd, CommonOptions& common, const std::string& default_output = "csv") {
  cmd->add_option("--output", common.output, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->default_str(default_output);
  cmd->add_option("--out", common.out_path, "Output path (default: stdout)");
  cmd->add_option("--seed", common.seed, "Random seed")->capture_default_str();
  cmd->add_option("--shards", common.shards, "Monte Carlo worker shards")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
}

std::vector<double> sorted_unique(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

nlohmann::ordered_json common_json(const CommonOptions& common) {
  return {{"output", common.output}, {"out", common.out_path}, {"seed", common.seed},
          {"shards", common.shards}};
}

// ---------------------------------------------------------------------------

struct MiVsLengthOptions {
  double nbar = 1e-5;
  std::vector<double> sigmas{0.0};
  std::vector<std::string> methods{"bound"};
  unsigned min_exp = 4;
  unsigned max_exp = 18;
  std::uint64_t samples = 100000;
};

int cmd_mi_vs_length(const MiVsLengthOptions& opt, const CommonOptions& common, std::ostream& out,
                     std::ostream& err) {
  if (opt.min_exp > opt.max_exp) throw DomainError("--min-exp must not exceed --max-exp");
  std::vector<double> lengths;
  for (unsigned m = opt.min_exp; m <= opt.max_exp; ++m) lengths.push_back(std::ldexp(1.0, static_cast<int>(m)));
  std::vector<ProbMethod> methods;
  for (const auto& name : opt.methods) methods.push_back(parse_prob_method(name));

  Table table{{"sigma", "L", "method", "p", "q", "mi_bits_per_bin"}, {}};
  const McSettings mc{opt.samples, common.seed, common.shards};
  for (double sigma : sorted_unique(opt.sigmas)) {
    std::vector<std::vector<LengthPoint>> curves;
    for (ProbMethod method : methods) {
      curves.push_back(mi_vs_length(opt.nbar, {sigma}, method, lengths, mc));
    }
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      for (std::size_t m = 0; m < methods.size(); ++m) {
        const MiResult& mi = curves[m][i].mi;
        if (mi.outside_validity) {
          err << "warning: " << to_string(methods[m]) << " probabilities outside validity at sigma="
              << format_double(sigma) << " L=" << static_cast<std::int64_t>(lengths[i]) << "\n";
        }
        table.rows.push_back({sigma, static_cast<std::int64_t>(lengths[i]), std::string(to_string(methods[m])),
                              mi.probs->p, mi.probs->q, mi.bits_per_bin});
      }
    }
  }
  if (common.output == "json") {
    nlohmann::ordered_json config = {{"nbar", opt.nbar},     {"sigma", sorted_unique(opt.sigmas)},
                                     {"method", opt.methods}, {"min_exp", opt.min_exp},
                                     {"max_exp", opt.max_exp}, {"samples", opt.samples}};
    config.update(common_json(common));
    emit(render_json(table, "mi-vs-length", config, common), common, out);
  } else {
    emit(render_csv(table), common, out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct RatioOptions {
  std::vector<double> sigmas{0.3};
  double nbar_min = 1e-8;
  double nbar_max = 1e-3;
  int points = 11;
  std::vector<std::string> methods{"bound", "expansion", "closed"};
};

int cmd_ratio_curve(const RatioOptions& opt, const CommonOptions& common, std::ostream& out) {
  const std::vector<double> grid = log_grid(opt.nbar_min, opt.nbar_max, opt.points);
  std::vector<RatioMethod> methods;
  for (const auto& name : opt.methods) methods.push_back(parse_ratio_method(name));

  Table table{{"sigma", "nbar", "method", "mi_sigma", "mi_noiseless", "ratio", "asymptote"}, {}};
  for (double sigma : sorted_unique(opt.sigmas)) {
    std::vector<std::vector<RatioPoint>> curves;
    for (RatioMethod method : methods) curves.push_back(ratio_curve(grid, {sigma}, method));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t m = 0; m < methods.size(); ++m) {
        const RatioPoint& pt = curves[m][i];
        table.rows.push_back({sigma, pt.nbar, std::string(to_string(methods[m])), pt.mi_sigma,
                              pt.mi_noiseless, pt.ratio, std::exp(-sigma * sigma)});
      }
    }
  }
  if (common.output == "json") {
    nlohmann::ordered_json config = {{"sigma", sorted_unique(opt.sigmas)}, {"nbar_min", opt.nbar_min},
                                     {"nbar_max", opt.nbar_max},           {"points", opt.points},
                                     {"method", opt.methods}};
    config.update(common_json(common));
    emit(render_json(table, "ratio-curve", config, common), common, out);
  } else {
    emit(render_csv(table), common, out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct OptimizeOptions {
  std::vector<double> nbars{1e-5};
  std::vector<double> sigmas{0.0};
  std::vector<std::string> methods{"bound", "expansion", "closed"};
  unsigned max_exp = 24;
};

int cmd_optimize(const OptimizeOptions& opt, const CommonOptions& common, std::ostream& out) {
  std::vector<RatioMethod> methods;
  for (const auto& name : opt.methods) methods.push_back(parse_ratio_method(name));
  Table table{{"sigma", "nbar", "method", "best_length", "pow2_below", "pow2_above", "mi_bits_per_bin",
               "discrete_length", "discrete_mi_bits_per_bin", "helstrom_linear", "holevo_leading"},
              {}};
  for (double sigma : sorted_unique(opt.sigmas)) {
    for (double nbar : sorted_unique(opt.nbars)) {
      for (RatioMethod method : methods) {
        std::vector<Cell> row{sigma, nbar, std::string(to_string(method))};
        if (method == RatioMethod::closed_form) {
          const MiResult mi = closed_form_mi(nbar, {sigma});
          row.insert(row.end(), {Cell{}, Cell{}, Cell{}, mi.bits_per_bin, Cell{}, Cell{}});
        } else {
          const ProbMethod prob = method == RatioMethod::bound ? ProbMethod::bound : ProbMethod::expansion;
          const OptimizationResult cont = optimize_continuous(nbar, {sigma}, prob);
          const OptimizationResult disc = optimize_discrete(nbar, {sigma}, prob, opt.max_exp);
          const double below = std::exp2(std::floor(std::log2(cont.best_length)));
          row.insert(row.end(), {cont.best_length, static_cast<std::int64_t>(below),
                                 static_cast<std::int64_t>(below == cont.best_length ? below : 2 * below),
                                 cont.best_mi.bits_per_bin, static_cast<std::int64_t>(disc.best_length),
                                 disc.best_mi.bits_per_bin});
        }
        row.push_back(helstrom_linear(nbar));
        row.push_back(holevo_leading(nbar));
        table.rows.push_back(std::move(row));
      }
    }
  }
  if (common.output == "json") {
    nlohmann::ordered_json config = {{"nbar", sorted_unique(opt.nbars)}, {"sigma", sorted_unique(opt.sigmas)},
                                     {"method", opt.methods},           {"max_exp", opt.max_exp}};
    config.update(common_json(common));
    emit(render_json(table, "optimize", config, common), common, out);
  } else {
    emit(render_csv(table), common, out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ValidateOptions {
  std::vector<double> nbars{1e-5, 1e-4};
  std::vector<double> sigmas{0.0, 0.1, 0.3, 1.0};
  std::vector<unsigned> exps{4, 8};
  std::uint64_t samples = 100000;
  bool perturb_bounds = false;
};

int cmd_validate(const ValidateOptions& opt, CommonOptions common, std::ostream& out) {
  // Sandwich and cross-checks use a 3-stderr margin.
  constexpr double kStderrs = 3.0;
  Table table{{"check", "nbar", "sigma", "L", "estimate", "stderr", "reference", "margin", "pass"}, {}};
  bool all_pass = true;
  auto record = [&](const std::string& name, double nbar, double sigma, std::int64_t length,
                    double estimate, double se, double reference, double margin) {
    const bool pass = margin >= 0.0;
    all_pass = all_pass && pass;
    table.rows.push_back({name, nbar, sigma, length, estimate, se, reference, margin, pass});
  };

  for (double nbar : sorted_unique(opt.nbars)) {
    for (double sigma : sorted_unique(opt.sigmas)) {
      for (unsigned m : opt.exps) {
        const HadamardMatrix matrix(m);
        const CodeConfig config{nbar, static_cast<double>(matrix.dim())};
        const NoiseModel noise{sigma};
        const ChannelProbs mc = estimate_pq_mc(matrix, nbar, noise, opt.samples, common.seed, common.shards);
        double p_bound = p_lower_bound(config, noise);
        double q_bound = q_upper_bound(config, noise);
        if (opt.perturb_bounds) {
          p_bound *= 1.5;
          q_bound *= 0.5;
        }
        const auto length = static_cast<std::int64_t>(matrix.dim());
        record("p_lower_bound", nbar, sigma, length, mc.p, mc.p_stderr, p_bound,
               mc.p + kStderrs * mc.p_stderr - p_bound);
        record("q_upper_bound", nbar, sigma, length, mc.q, mc.q_stderr, q_bound,
               q_bound - (mc.q - kStderrs * mc.q_stderr));
        if (sigma == 0.0) {
          record("noiseless_q_zero", nbar, sigma, length, mc.q, mc.q_stderr, 0.0,
                 (mc.q == 0.0 && mc.q_stderr == 0.0) ? 0.0 : -std::abs(mc.q) - mc.q_stderr);
        }
      }
    }
  }

  // Second-order expansion against Monte Carlo, with an (L nbar)^3 truncation allowance.
  for (double sigma : {0.3, 0.7}) {
    const HadamardMatrix matrix(4);
    const CodeConfig config{1e-3, 16.0};
    const ChannelProbs mc = estimate_pq_mc(matrix, config.nbar, {sigma}, opt.samples, common.seed, common.shards);
    const ChannelProbs series = second_order_pq(config, {sigma});
    const double allowance = std::pow(config.length * config.nbar, 3);
    record("expansion_p_vs_mc", config.nbar, sigma, 16, mc.p, mc.p_stderr, series.p,
           kStderrs * mc.p_stderr + allowance - std::abs(mc.p - series.p));
    record("expansion_q_vs_mc", config.nbar, sigma, 16, mc.q, mc.q_stderr, series.q,
           kStderrs * mc.q_stderr + allowance - std::abs(mc.q - series.q));
  }

  if (common.output == "csv") {
    emit(render_csv(table), common, out);
  } else {
    nlohmann::ordered_json config = {{"nbar", sorted_unique(opt.nbars)}, {"sigma", sorted_unique(opt.sigmas)},
                                     {"exp", opt.exps},                 {"samples", opt.samples},
                                     {"perturb_bounds", opt.perturb_bounds}};
    config.update(common_json(common));
    emit(render_json(table, "validate", config, common, {{"all_pass", all_pass}}), common, out);
  }
  return all_pass ? kExitOk : kExitValidationFailed;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Collective BPSK with Hadamard words under Gaussian phase noise"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommonOptions common;

  MiVsLengthOptions mvl;
  auto* mvl_cmd = app.add_subcommand("mi-vs-length", "Mutual information per bin versus sequence length");
  mvl_cmd->add_option("--nbar", mvl.nbar, "Mean photon number per time bin")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  mvl_cmd->add_option("--sigma", mvl.sigmas, "Phase noise std. dev. (repeatable)")->check(CLI::NonNegativeNumber);
  mvl_cmd->add_option("--method", mvl.methods, "bound | expansion | monte_carlo (repeatable)")
      ->check(CLI::IsMember({"bound", "expansion", "monte_carlo", "mc"}));
  mvl_cmd->add_option("--min-exp", mvl.min_exp, "Smallest L = 2^min_exp")->check(CLI::Range(0u, 24u));
  mvl_cmd->add_option("--max-exp", mvl.max_exp, "Largest L = 2^max_exp")->check(CLI::Range(0u, 24u));
  mvl_cmd->add_option("--samples", mvl.samples, "Monte Carlo samples per point")->check(CLI::PositiveNumber);
  add_common(mvl_cmd, common);

  RatioOptions ratio;
  auto* ratio_cmd = app.add_subcommand("ratio-curve", "Optimised I(sigma) / I_0 versus mean photon number");
  ratio_cmd->add_option("--sigma", ratio.sigmas, "Phase noise std. dev. (repeatable)")->check(CLI::NonNegativeNumber);
  ratio_cmd->add_option("--nbar-min", ratio.nbar_min)->check(CLI::Range(1e-300, 0.1));
  ratio_cmd->add_option("--nbar-max", ratio.nbar_max)->check(CLI::Range(1e-300, 0.1));
  ratio_cmd->add_option("--points", ratio.points, "Log-spaced grid size")->check(CLI::Range(1, 10000));
  ratio_cmd->add_option("--method", ratio.methods, "bound | expansion | closed (repeatable)")
      ->check(CLI::IsMember({"bound", "expansion", "closed"}));
  add_common(ratio_cmd, common);

  OptimizeOptions optimize;
  auto* opt_cmd = app.add_subcommand("optimize", "Optimal sequence length and mutual information");
  opt_cmd->add_option("--nbar", optimize.nbars, "Mean photon number (repeatable)")->check(CLI::Range(1e-300, 0.1));
  opt_cmd->add_option("--sigma", optimize.sigmas, "Phase noise std. dev. (repeatable)")->check(CLI::NonNegativeNumber);
  opt_cmd->add_option("--method", optimize.methods, "bound | expansion | closed (repeatable)")
      ->check(CLI::IsMember({"bound", "expansion", "closed"}));
  opt_cmd->add_option("--max-exp", optimize.max_exp, "Largest discrete L = 2^max_exp")->check(CLI::Range(0u, 24u));
  add_common(opt_cmd, common);

  ValidateOptions validate_opt;
  auto* val_cmd = app.add_subcommand("validate", "Monte Carlo checks of the bounds and the expansion");
  val_cmd->add_option("--nbar", validate_opt.nbars, "Mean photon numbers (repeatable)")->check(CLI::NonNegativeNumber);
  val_cmd->add_option("--sigma", validate_opt.sigmas, "Phase noise std. devs. (repeatable)")->check(CLI::NonNegativeNumber);
  val_cmd->add_option("--exp", validate_opt.exps, "Length exponents m, L = 2^m (repeatable)")->check(CLI::Range(0u, 16u));
  val_cmd->add_option("--samples", validate_opt.samples, "Monte Carlo samples per point")->check(CLI::PositiveNumber);
  val_cmd->add_flag("--perturb-bounds", validate_opt.perturb_bounds, "Test hook: corrupt the bounds");
  add_common(val_cmd, common, "json");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  // The validate report defaults to JSON; the explicit flag still wins.
  const bool explicit_output = std::any_of(args.begin(), args.end(), [](const std::string& a) {
    return a == "--output" || a.rfind("--output=", 0) == 0;
  });
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*mvl_cmd) return cmd_mi_vs_length(mvl, common, out, err);
    if (*ratio_cmd) return cmd_ratio_curve(ratio, common, out);
    if (*opt_cmd) return cmd_optimize(optimize, common, out);
    if (*val_cmd) {
      if (!explicit_output) common.output = "json";
      return cmd_validate(validate_opt, common, out);
    }
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidationFailed;
  }
  return kExitUsage;
}

}  // namespace cbpsk::cli
