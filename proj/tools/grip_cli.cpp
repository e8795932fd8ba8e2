#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "grip/bootstrap.hpp"
#include "grip/dataset.hpp"
#include "grip/estimators.hpp"
#include "grip/experiments.hpp"
#include "grip/lp.hpp"
#include "grip/rng.hpp"
#include "grip/statistic.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

using nlohmann::ordered_json;

// Shortest round-trip decimal form, identical across runs and platforms.
std::string format_double(double v) { return nlohmann::json(v).dump(); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream stream(s);
  while (std::getline(stream, item, delim)) out.push_back(item);
  if (!s.empty() && s.back() == delim) out.push_back("");
  return out;
}

double parse_double(const std::string& token, const std::string& what) {
  const std::string t = trim(token);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw std::invalid_argument("cannot parse " + what + ": '" + token + "'");
  return v;
}

long long parse_int(const std::string& token, const std::string& what) {
  const std::string t = trim(token);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw std::invalid_argument("cannot parse " + what + ": '" + token + "'");
  return v;
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  for (const std::string& tok : split(text, ','))
    out.push_back(parse_double(tok, what));
  return out;
}

std::vector<int> parse_int_list(const std::string& text,
                                const std::string& what) {
  std::vector<int> out;
  for (const std::string& tok : split(text, ','))
    out.push_back(static_cast<int>(parse_int(tok, what)));
  return out;
}

std::string join(const std::vector<std::string>& parts, char delim) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += delim;
    out += parts[i];
  }
  return out;
}

template <typename T, typename Fmt>
std::string join_fmt(const std::vector<T>& values, Fmt fmt) {
  std::vector<std::string> parts;
  parts.reserve(values.size());
  for (const T& v : values) parts.push_back(fmt(v));
  return join(parts, ',');
}

// FNV-1a over canonical "key=value" lines; keys are fed in a fixed order so
// the digest identifies the fully-resolved configuration.
class ConfigDigest {
 public:
  void add(const std::string& key, const std::string& value) {
    feed(key);
    feed("=");
    feed(value);
    feed("\n");
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  void feed(const std::string& s) {
    for (unsigned char c : s) {
      h_ ^= c;
      h_ *= 1099511628211ull;
    }
  }
  std::uint64_t h_ = 1469598103934665603ull;
};

int env_threads() {
  const char* raw = std::getenv("GRIP_THREADS");
  if (raw == nullptr || *raw == '\0') return 1;
  const long long v = parse_int(raw, "GRIP_THREADS");
  if (v < 1) throw std::invalid_argument("GRIP_THREADS must be a positive integer");
  return static_cast<int>(v);
}

int resolve_threads(int flag_value) {
  return flag_value > 0 ? flag_value : env_threads();
}

grip::MultiplierScheme parse_block(const std::string& text) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 2)
    throw std::invalid_argument("--block expects 'q,r' with two integers");
  const int q = static_cast<int>(parse_int(parts[0], "--block q"));
  const int r = static_cast<int>(parse_int(parts[1], "--block r"));
  return grip::MultiplierScheme::block(q, r);
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// ---------------------------------------------------------------------------
// CSV input
// ---------------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;  // rows x columns
};

CsvTable read_csv(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::invalid_argument("cannot open data file '" + path + "'");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw std::invalid_argument("data file '" + path + "' is empty");

  CsvTable table;
  for (const std::string& name : split(lines[0], ','))
    table.header.push_back(trim(name));
  const int cols = static_cast<int>(table.header.size());
  const int rows = static_cast<int>(lines.size()) - 1;
  table.values.resize(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const std::vector<std::string> cells = split(lines[r + 1], ',');
    if (static_cast<int>(cells.size()) != cols) {
      throw std::invalid_argument(
          "data row " + std::to_string(r + 1) + " has " +
          std::to_string(cells.size()) + " fields, expected " +
          std::to_string(cols));
    }
    for (int c = 0; c < cols; ++c) {
      const std::string cell = trim(cells[c]);
      const std::string where =
          "data row " + std::to_string(r + 1) + ", column '" + table.header[c] + "'";
      if (cell.empty())
        throw std::invalid_argument("missing value at " + where);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw std::invalid_argument("cannot parse value at " + where + ": '" + cell + "'");
      if (!std::isfinite(v))
        throw std::invalid_argument("non-finite value at " + where);
      table.values(r, c) = v;
    }
  }
  return table;
}

int find_column(const std::vector<std::string>& header, const std::string& token) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == token) return static_cast<int>(i);
  return -1;
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Tested columns: names or 1-based indices/ranges into the predictor columns
// (all columns except the response, in file order).
std::vector<int> resolve_test_columns(const std::vector<std::string>& predictors,
                                      const std::string& spec) {
  const int p = static_cast<int>(predictors.size());
  auto check_range = [p](long long idx) {
    if (idx < 1 || idx > p)
      throw std::invalid_argument("tested column index " + std::to_string(idx) +
                                  " out of range [1, " + std::to_string(p) + "]");
    return static_cast<int>(idx);
  };
  std::vector<int> out;
  for (const std::string& raw : split(spec, ',')) {
    const std::string tok = trim(raw);
    if (tok.empty())
      throw std::invalid_argument("--test contains an empty entry");
    const auto dash = tok.find('-');
    if (all_digits(tok)) {
      out.push_back(check_range(parse_int(tok, "--test index")));
    } else if (dash != std::string::npos && all_digits(tok.substr(0, dash)) &&
               all_digits(tok.substr(dash + 1))) {
      const int lo = check_range(parse_int(tok.substr(0, dash), "--test range"));
      const int hi = check_range(parse_int(tok.substr(dash + 1), "--test range"));
      if (lo > hi)
        throw std::invalid_argument("--test range '" + tok + "' is reversed");
      for (int j = lo; j <= hi; ++j) out.push_back(j);
    } else {
      const int idx = find_column(predictors, tok);
      if (idx < 0)
        throw std::invalid_argument("tested column '" + tok + "' not found");
      out.push_back(idx + 1);
    }
  }
  return out;
}

std::vector<double> resolve_beta0(const std::string& spec) {
  // A comma list of reals, otherwise a whitespace-separated file of reals.
  bool is_list = true;
  std::vector<double> values;
  try {
    values = parse_double_list(spec, "--beta0 entry");
  } catch (const std::invalid_argument&) {
    is_list = false;
  }
  if (is_list) return values;
  std::ifstream file(spec);
  if (!file)
    throw std::invalid_argument(
        "--beta0 is neither a number list nor a readable file: '" + spec + "'");
  values.clear();
  std::string tok;
  while (file >> tok) values.push_back(parse_double(tok, "beta0 file entry"));
  if (values.empty())
    throw std::invalid_argument("beta0 file '" + spec + "' contains no values");
  return values;
}

// ---------------------------------------------------------------------------
// Flat TOML subset for --config: 'key = value' lines, # comments, scalars,
// quoted strings, and one-level [a, b, c] lists.
// ---------------------------------------------------------------------------

std::map<std::string, std::string> read_flat_toml(const std::string& path) {
  std::ifstream file(path);
  if (!file)
    throw std::invalid_argument("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(file, line)) {
    ++lineno;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    const std::string entry = trim(line);
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " has no '='");
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " is malformed");
    out[key] = value;
  }
  return out;
}

std::string toml_unquote(const std::string& value) {
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
    return value.substr(1, value.size() - 2);
  return value;
}

std::string toml_unlist(const std::string& value) {
  if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
    std::string inner = trim(value.substr(1, value.size() - 2));
    return inner;
  }
  return value;
}

// ---------------------------------------------------------------------------
// test subcommand
// ---------------------------------------------------------------------------

struct TestArgs {
  std::string data;
  std::string response;
  std::string test;
  std::string beta0;
  std::string block;
  double alpha = 0.05;
  int bootstrap = 500;
  std::uint64_t seed = 0;
  bool auto_relax = false;
  int threads = -1;
};

int run_test_command(const TestArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  const int threads = resolve_threads(args.threads);

  const CsvTable table = read_csv(args.data);
  int resp = find_column(table.header, args.response);
  if (resp < 0 && all_digits(args.response)) {
    const long long idx = parse_int(args.response, "--response index");
    if (idx >= 1 && idx <= static_cast<long long>(table.header.size()))
      resp = static_cast<int>(idx - 1);
  }
  if (resp < 0)
    throw std::invalid_argument("response column '" + args.response + "' not found");

  std::vector<std::string> predictors;
  std::vector<int> source_col;
  for (int c = 0; c < static_cast<int>(table.header.size()); ++c) {
    if (c == resp) continue;
    predictors.push_back(table.header[c]);
    source_col.push_back(c);
  }
  const int n = static_cast<int>(table.values.rows());
  const int p = static_cast<int>(predictors.size());
  if (n < 2) throw std::invalid_argument("need at least two observations");
  if (p < 2) throw std::invalid_argument("need at least two predictor columns");

  const std::vector<int> test_idx = resolve_test_columns(predictors, args.test);
  if (static_cast<int>(test_idx.size()) >= p)
    throw std::invalid_argument(
        "tested set covers every predictor; at least one control must remain");

  const std::vector<double> beta0_values = resolve_beta0(args.beta0);
  if (beta0_values.size() != test_idx.size())
    throw std::invalid_argument(
        "--beta0 has " + std::to_string(beta0_values.size()) +
        " values for " + std::to_string(test_idx.size()) + " tested columns");

  if (!(args.alpha > 0.0 && args.alpha < 1.0))
    throw std::invalid_argument("--alpha must lie in (0, 1)");
  if (args.bootstrap < 1)
    throw std::invalid_argument("--bootstrap must be positive");

  grip::MultiplierScheme scheme = grip::MultiplierScheme::iid();
  if (!args.block.empty()) scheme = parse_block(args.block);

  Eigen::MatrixXd w(n, p);
  for (int j = 0; j < p; ++j) w.col(j) = table.values.col(source_col[j]);
  const Eigen::VectorXd y = table.values.col(resp);
  const grip::Dataset data = grip::split_dataset(w, y, test_idx);
  Eigen::VectorXd beta0 =
      Eigen::Map<const Eigen::VectorXd>(beta0_values.data(),
                                        static_cast<int>(beta0_values.size()));

  ConfigDigest digest;
  digest.add("command", "test");
  digest.add("alpha", format_double(args.alpha));
  digest.add("auto_relax", args.auto_relax ? "true" : "false");
  digest.add("beta0", join_fmt(beta0_values, format_double));
  digest.add("block", args.block.empty() ? "iid" : args.block);
  digest.add("bootstrap", std::to_string(args.bootstrap));
  digest.add("data", args.data);
  digest.add("response", table.header[resp]);
  digest.add("seed", std::to_string(args.seed));
  digest.add("test", join_fmt(test_idx, [](int v) { return std::to_string(v); }));

  grip::RngStream root(args.seed);
  grip::RngStream tuning_stream = root.substream(0);
  const grip::TuningParams tuning =
      grip::select_tuning(data, beta0, 0.95, 30, tuning_stream);

  grip::FitOptions options;
  options.auto_relax = args.auto_relax;
  options.threads = threads;
  const grip::GammaFit gamma_fit = grip::fit_gamma(data, beta0, tuning, options);
  const grip::ThetaFit theta_fit = grip::fit_theta(data, tuning, options);
  const grip::TestStatistic stat = grip::compute_grip_statistic(gamma_fit, theta_fit);
  const Eigen::VectorXd draws =
      grip::bootstrap_distribution(stat, scheme, args.bootstrap, root.substream(1));
  const grip::BootstrapResult result =
      grip::quantile_and_decide(stat.t_max, draws, args.alpha);

  int retries = gamma_fit.relax_rounds;
  for (int r : theta_fit.relax_rounds) retries += r;

  auto to_array = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };

  ordered_json out;
  out["command"] = "test";
  out["config_digest"] = digest.hex();
  out["t_max"] = stat.t_max;
  out["t_n"] = to_array(stat.t_n);
  out["quantile"] = result.quantile;
  out["p_value"] = result.p_value;
  out["reject"] = result.reject;
  out["alpha"] = args.alpha;
  out["B"] = args.bootstrap;
  out["sigma_eps_hat"] = gamma_fit.sigma_eps_hat;
  out["sigma_u_hat"] = to_array(theta_fit.sigma_u_hat);
  out["tuning"] = ordered_json{{"eta_gamma", tuning.eta_gamma},
                               {"etabar_gamma", tuning.etabar_gamma},
                               {"mu_gamma", tuning.mu_gamma},
                               {"eta_theta", to_array(tuning.eta_theta)},
                               {"etabar_theta", to_array(tuning.etabar_theta)},
                               {"mu_theta", to_array(tuning.mu_theta)},
                               {"lambda_gamma", tuning.lambda_gamma}};
  out["infeasibility_retries"] = retries;
  out["seed"] = args.seed;
  out["version"] = kVersion;
  out["wall_time_s"] = elapsed_s(start);
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate subcommand
// ---------------------------------------------------------------------------

struct SimulateArgs {
  int model = 1;
  int n = 200;
  int p = 500;
  std::string s = "2";
  std::string h = "0";
  int reps = 100;
  std::string alpha = "0.05";
  int bootstrap = 500;
  std::uint64_t seed = 0;
  std::string block;
  std::string config;
  int threads = -1;
  bool timing = false;
  bool dump_config = false;

  // which flags were given on the command line (file must not override them)
  std::map<std::string, bool> given;
};

void merge_config_file(SimulateArgs& args) {
  if (args.config.empty()) return;
  const std::map<std::string, std::string> file = read_flat_toml(args.config);
  for (const auto& [key, raw] : file) {
    if (args.given[key]) continue;
    const std::string value = toml_unquote(toml_unlist(raw));
    if (key == "model") {
      args.model = static_cast<int>(parse_int(value, "config model"));
    } else if (key == "n") {
      args.n = static_cast<int>(parse_int(value, "config n"));
    } else if (key == "p") {
      args.p = static_cast<int>(parse_int(value, "config p"));
    } else if (key == "s") {
      args.s = value;
    } else if (key == "h") {
      args.h = value;
    } else if (key == "reps") {
      args.reps = static_cast<int>(parse_int(value, "config reps"));
    } else if (key == "alpha") {
      args.alpha = value;
    } else if (key == "bootstrap") {
      args.bootstrap = static_cast<int>(parse_int(value, "config bootstrap"));
    } else if (key == "seed") {
      args.seed = static_cast<std::uint64_t>(parse_int(value, "config seed"));
    } else if (key == "block") {
      args.block = value;
    } else if (key == "threads") {
      args.threads = static_cast<int>(parse_int(value, "config threads"));
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
}

grip::ExperimentConfig build_experiment_config(const SimulateArgs& args) {
  if (args.model < 1 || args.model > 3)
    throw std::invalid_argument("--model must be 1, 2, or 3");
  grip::ExperimentConfig cfg;
  cfg.model = static_cast<grip::Model>(args.model);
  cfg.n = args.n;
  cfg.p = args.p;
  cfg.sparsity_grid = parse_int_list(args.s, "--s entry");
  cfg.h_grid = parse_double_list(args.h, "--h entry");
  cfg.alpha_levels = parse_double_list(args.alpha, "--alpha entry");
  cfg.reps = args.reps;
  cfg.B = args.bootstrap;
  cfg.seed = args.seed;
  if (!args.block.empty()) cfg.scheme = parse_block(args.block);
  cfg.threads = resolve_threads(args.threads);
  cfg.validate();
  return cfg;
}

std::string simulate_digest(const grip::ExperimentConfig& cfg) {
  ConfigDigest digest;
  digest.add("command", "simulate");
  digest.add("alpha", join_fmt(cfg.alpha_levels, format_double));
  digest.add("block", cfg.scheme.kind == grip::MultiplierScheme::Kind::Block
                          ? std::to_string(cfg.scheme.q) + "," +
                                std::to_string(cfg.scheme.r)
                          : "iid");
  digest.add("bootstrap", std::to_string(cfg.B));
  digest.add("h", join_fmt(cfg.h_grid, format_double));
  digest.add("model", std::to_string(static_cast<int>(cfg.model)));
  digest.add("n", std::to_string(cfg.n));
  digest.add("p", std::to_string(cfg.p));
  digest.add("reps", std::to_string(cfg.reps));
  digest.add("s", join_fmt(cfg.sparsity_grid,
                           [](int v) { return std::to_string(v); }));
  digest.add("seed", std::to_string(cfg.seed));
  return digest.hex();
}

std::string dump_config_toml(const grip::ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "model = " << static_cast<int>(cfg.model) << "\n";
  out << "n = " << cfg.n << "\n";
  out << "p = " << cfg.p << "\n";
  out << "s = [" << join_fmt(cfg.sparsity_grid,
                             [](int v) { return std::to_string(v); })
      << "]\n";
  out << "h = [" << join_fmt(cfg.h_grid, format_double) << "]\n";
  out << "alpha = [" << join_fmt(cfg.alpha_levels, format_double) << "]\n";
  out << "reps = " << cfg.reps << "\n";
  out << "bootstrap = " << cfg.B << "\n";
  out << "seed = " << cfg.seed << "\n";
  if (cfg.scheme.kind == grip::MultiplierScheme::Kind::Block)
    out << "block = \"" << cfg.scheme.q << "," << cfg.scheme.r << "\"\n";
  return out.str();
}

void print_run_record(const std::string& command, const std::string& digest,
                      std::uint64_t seed, double wall_time_s) {
  ordered_json record;
  record["command"] = command;
  record["config_digest"] = digest;
  record["seed"] = seed;
  record["version"] = kVersion;
  record["wall_time_s"] = wall_time_s;
  std::cerr << record.dump() << "\n";
}

int run_simulate_command(SimulateArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  merge_config_file(args);
  const grip::ExperimentConfig cfg = build_experiment_config(args);
  const std::string digest = simulate_digest(cfg);

  if (args.dump_config) {
    std::cout << dump_config_toml(cfg);
    print_run_record("simulate", digest, cfg.seed, elapsed_s(start));
    return 0;
  }

  const std::vector<grip::SizePowerRow> rows = grip::run_size_power(cfg);
  std::cout << "model,n,p,s,h,alpha,reps,rejection_rate,infeasible_count,"
               "mean_runtime_s\n";
  for (const grip::SizePowerRow& row : rows) {
    const double runtime = args.timing ? row.mean_runtime_s : 0.0;
    std::cout << static_cast<int>(row.model) << ',' << row.n << ',' << row.p
              << ',' << row.s << ',' << format_double(row.h) << ','
              << format_double(row.alpha) << ',' << row.reps << ','
              << format_double(row.rejection_rate) << ','
              << row.infeasible_count << ',' << format_double(runtime) << "\n";
  }
  print_run_record("simulate", digest, cfg.seed, elapsed_s(start));
  return 0;
}

// ---------------------------------------------------------------------------
// figure1 subcommand
// ---------------------------------------------------------------------------

struct Figure1Args {
  int n = 300;
  int p = 700;
  std::string s_grid = "0,50,100,150,200,250,300";
  int reps = 200;
  std::string alpha = "0.01,0.05,0.1";
  int bootstrap = 500;
  std::uint64_t seed = 0;
  int threads = -1;
};

int run_figure1_command(const Figure1Args& args) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<int> grid = parse_int_list(args.s_grid, "--s-grid entry");
  const std::vector<double> levels = parse_double_list(args.alpha, "--alpha entry");

  ConfigDigest digest;
  digest.add("command", "figure1");
  digest.add("alpha", join_fmt(levels, format_double));
  digest.add("bootstrap", std::to_string(args.bootstrap));
  digest.add("n", std::to_string(args.n));
  digest.add("p", std::to_string(args.p));
  digest.add("reps", std::to_string(args.reps));
  digest.add("s_grid",
             join_fmt(grid, [](int v) { return std::to_string(v); }));
  digest.add("seed", std::to_string(args.seed));

  const std::vector<grip::Figure1Row> rows =
      grip::run_figure1(args.n, args.p, grid, args.reps, levels, args.seed,
                        args.bootstrap, resolve_threads(args.threads));
  std::cout << "s,alpha,rejection_rate,reps\n";
  for (const grip::Figure1Row& row : rows) {
    std::cout << row.s << ',' << format_double(row.alpha) << ','
              << format_double(row.rejection_rate) << ',' << row.reps << "\n";
  }
  print_run_record("figure1", digest.hex(), args.seed, elapsed_s(start));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simultaneous coefficient testing for high-dimensional linear models"};
  app.require_subcommand(1);
  // --h is a real option below, so the help flag must not claim short -h.
  app.set_help_flag("--help", "Print this help message and exit");

  TestArgs test_args;
  CLI::App* test = app.add_subcommand(
      "test", "Run the simultaneous test on a CSV dataset");
  test->set_help_flag("--help", "Print this help message and exit");
  test->add_option("--data", test_args.data, "CSV file with a header row")
      ->required();
  test->add_option("--response", test_args.response,
                   "Response column (name or 1-based index)")
      ->required();
  test->add_option("--test", test_args.test,
                   "Tested predictor columns: names, 1-based indices, or "
                   "ranges like 4-9, comma separated")
      ->required();
  test->add_option("--beta0", test_args.beta0,
                   "Null values: comma list or a file of reals")
      ->required();
  test->add_option("--alpha", test_args.alpha, "Test level")->capture_default_str();
  test->add_option("--bootstrap", test_args.bootstrap,
                   "Number of multiplier draws")->capture_default_str();
  test->add_option("--seed", test_args.seed, "RNG seed")->capture_default_str();
  test->add_option("--block", test_args.block,
                   "Block multipliers 'q,r' (default: independent Gaussians)");
  test->add_flag("--auto-relax", test_args.auto_relax,
                 "Relax eta/mu geometrically when a program is infeasible");
  test->add_option("--threads", test_args.threads,
                   "Worker threads (default: GRIP_THREADS or 1)");

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Size/power study on synthetic regression models");
  simulate->set_help_flag("--help", "Print this help message and exit");
  simulate->add_option("--model", sim_args.model,
                       "Design model: 1 Toeplitz, 2 equicorrelation, "
                       "3 equicorrelation with t(6) entries")->capture_default_str();
  simulate->add_option("--n", sim_args.n, "Observations")->capture_default_str();
  simulate->add_option("--p", sim_args.p, "Design columns")->capture_default_str();
  simulate->add_option("--s", sim_args.s, "Sparsity grid, comma separated")->capture_default_str();
  simulate->add_option("--h", sim_args.h,
                       "Null deviation grid (beta0 = beta* + h/sqrt(n))")->capture_default_str();
  simulate->add_option("--reps", sim_args.reps, "Replications per cell")->capture_default_str();
  simulate->add_option("--alpha", sim_args.alpha, "Levels, comma separated")->capture_default_str();
  simulate->add_option("--bootstrap", sim_args.bootstrap,
                       "Number of multiplier draws")->capture_default_str();
  simulate->add_option("--seed", sim_args.seed, "RNG seed")->capture_default_str();
  simulate->add_option("--block", sim_args.block, "Block multipliers 'q,r'");
  simulate->add_option("--config", sim_args.config,
                       "TOML file with the same keys; flags override it");
  simulate->add_option("--threads", sim_args.threads,
                       "Worker threads (default: GRIP_THREADS or 1)");
  simulate->add_flag("--timing", sim_args.timing,
                     "Report measured mean_runtime_s instead of 0.0");
  simulate->add_flag("--dump-config", sim_args.dump_config,
                     "Print the resolved configuration as TOML and exit");

  Figure1Args fig_args;
  CLI::App* figure1 = app.add_subcommand(
      "figure1", "Marginal-test rejection curve against control sparsity");
  figure1->set_help_flag("--help", "Print this help message and exit");
  figure1->add_option("--n", fig_args.n, "Observations")->capture_default_str();
  figure1->add_option("--p", fig_args.p, "Design columns (even)")->capture_default_str();
  figure1->add_option("--s-grid", fig_args.s_grid,
                      "Control sparsity grid, comma separated")->capture_default_str();
  figure1->add_option("--reps", fig_args.reps, "Replications per grid point")->capture_default_str();
  figure1->add_option("--alpha", fig_args.alpha, "Levels, comma separated")->capture_default_str();
  figure1->add_option("--bootstrap", fig_args.bootstrap,
                      "Number of multiplier draws")->capture_default_str();
  figure1->add_option("--seed", fig_args.seed, "RNG seed")->capture_default_str();
  figure1->add_option("--threads", fig_args.threads,
                      "Worker threads (default: GRIP_THREADS or 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (const std::string& key :
       {"model", "n", "p", "s", "h", "reps", "alpha", "bootstrap", "seed",
        "block", "threads"}) {
    sim_args.given[key] = simulate->count("--" + key) > 0;
  }

  try {
    if (test->parsed()) return run_test_command(test_args);
    if (simulate->parsed()) return run_simulate_command(sim_args);
    if (figure1->parsed()) return run_figure1_command(fig_args);
  } catch (const grip::InfeasibleError& e) {
    std::cerr << "grip: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "grip: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
