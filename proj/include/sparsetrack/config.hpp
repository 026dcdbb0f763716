#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sparsetrack/common.hpp"
#include "sparsetrack/model.hpp"

namespace sparsetrack::bench {

// Noise variance realizing a target SMNR in dB, under E||x_t||^2 = 1:
// sigma_n^2 = 1 / (M * SMNR_linear).
inline double sigma_n2_from_smnr(int m, double smnr_db) {
  if (m < 1) throw InvalidDimension("sigma_n2_from_smnr: M must be >= 1");
  return 1.0 / (static_cast<double>(m) * db_to_linear(smnr_db));
}

enum class Algorithm { omp, dip, rdip, genie };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::omp: return "omp";
    case Algorithm::dip: return "dip";
    case Algorithm::rdip: return "rdip";
    case Algorithm::genie: return "genie";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& name) {
  if (name == "omp") return Algorithm::omp;
  if (name == "dip") return Algorithm::dip;
  if (name == "rdip") return Algorithm::rdip;
  if (name == "genie") return Algorithm::genie;
  throw InvalidParameter("unknown algorithm '" + name + "'");
}

enum class LambdaKind { neighbor, mixture, fixed };

inline LambdaKind parse_lambda_kind(const std::string& name) {
  if (name == "neighbor") return LambdaKind::neighbor;
  if (name == "mixture") return LambdaKind::mixture;
  if (name == "static") return LambdaKind::fixed;
  throw InvalidParameter("unknown lambda kind '" + name + "' (expected neighbor|mixture|static)");
}

inline const char* to_string(LambdaKind k) {
  switch (k) {
    case LambdaKind::neighbor: return "neighbor";
    case LambdaKind::mixture: return "mixture";
    case LambdaKind::fixed: return "static";
  }
  return "?";
}

// One operating point of a sweep.
struct GridPoint {
  double smnr_db = 0.0;
  double kappa = 0.0;
  double nu = 0.0;  // 0 when the transition model has no mixture factor
};

// Monte Carlo experiment description. Parsed from a flat `key = value` file;
// at most one of the smnr_db / kappa / nu axes may hold more than one value,
// and that axis is the sweep. M is derived per grid point as round(kappa * N).
struct ExperimentConfig {
  int n = 200;
  int k = 10;
  int k_max = -1;          // -1: defaults to k
  int t = 100;
  double alpha = -0.8;
  double sigma_w2 = -1.0;  // -1: defaults to (1 - alpha^2) / k, making E||x||^2 = 1
  LambdaKind lambda_kind = LambdaKind::neighbor;
  std::vector<double> smnr_db{10.0};
  std::vector<double> kappa{0.25};
  std::vector<double> nu{0.5};
  std::vector<Algorithm> algorithms{Algorithm::omp, Algorithm::dip};
  int runs = 20;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output_path = "results.csv";

  int resolved_k_max() const { return k_max < 0 ? k : k_max; }
  double resolved_sigma_w2() const {
    return sigma_w2 < 0.0 ? (1.0 - alpha * alpha) / static_cast<double>(k) : sigma_w2;
  }

  int grid_size() const {
    return static_cast<int>(std::max({smnr_db.size(), kappa.size(), nu.size()}));
  }

  GridPoint grid_point(int g) const {
    auto pick = [g](const std::vector<double>& axis) {
      return axis.size() > 1 ? axis[static_cast<std::size_t>(g)] : axis.front();
    };
    GridPoint gp{pick(smnr_db), pick(kappa), pick(nu)};
    if (lambda_kind != LambdaKind::mixture) gp.nu = 0.0;
    return gp;
  }

  int measurement_dim(double kappa_value) const {
    return static_cast<int>(std::lround(kappa_value * n));
  }

  model::ModelParams model_params(const GridPoint& gp) const {
    model::ModelParams params;
    params.n = n;
    params.m = measurement_dim(gp.kappa);
    params.k = k;
    params.k_max = resolved_k_max();
    params.t = t;
    params.alpha = alpha;
    params.sigma_w2 = resolved_sigma_w2();
    params.sigma_n2 = sigma_n2_from_smnr(params.m, gp.smnr_db);
    return params;
  }

  model::TransitionMatrix transition_matrix(const GridPoint& gp) const {
    switch (lambda_kind) {
      case LambdaKind::neighbor: return model::neighbor_transitions(n);
      case LambdaKind::mixture: return model::mixture_transitions(n, gp.nu);
      case LambdaKind::fixed: return model::static_transitions(n);
    }
    throw InvalidParameter("unreachable lambda kind");
  }

  // Every configuration error is raised here, before any computation.
  void validate() const {
    if (smnr_db.empty() || kappa.empty() || nu.empty())
      throw InvalidParameter("config: grids must be nonempty");
    const int wide = (smnr_db.size() > 1) + (kappa.size() > 1) + (nu.size() > 1);
    if (wide > 1) throw InvalidParameter("config: only one of smnr_db/kappa/nu may be swept");
    if (nu.size() > 1 && lambda_kind != LambdaKind::mixture)
      throw InvalidParameter("config: a nu sweep requires lambda = mixture");
    if (runs < 1) throw InvalidParameter("config: runs must be >= 1");
    if (threads < 1) throw InvalidParameter("config: threads must be >= 1");
    if (algorithms.empty()) throw InvalidParameter("config: algorithms must be nonempty");
    for (std::size_t a = 0; a < algorithms.size(); ++a)
      for (std::size_t b = a + 1; b < algorithms.size(); ++b)
        if (algorithms[a] == algorithms[b]) throw InvalidParameter("config: duplicate algorithm");
    for (int g = 0; g < grid_size(); ++g) {
      const GridPoint gp = grid_point(g);
      if (!std::isfinite(gp.smnr_db)) throw InvalidParameter("config: smnr_db must be finite");
      model_params(gp).validate();
      if (lambda_kind == LambdaKind::mixture && (gp.nu < 0.0 || gp.nu > 1.0))
        throw InvalidParameter("config: nu must lie in [0, 1]");
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

inline double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw InvalidParameter("config: cannot parse '" + s + "' as a number for key '" + key + "'");
  }
}

inline long long parse_int(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw InvalidParameter("config: cannot parse '" + s + "' as an integer for key '" + key + "'");
  }
}

inline std::vector<double> parse_double_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(item, key));
  if (out.empty()) throw InvalidParameter("config: empty list for key '" + key + "'");
  return out;
}

}  // namespace detail

// Apply one `key = value` assignment. Shared by the file parser and the CLI
// flag overrides so both accept identical syntax.
inline void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value) {
  if (key == "n") config.n = static_cast<int>(detail::parse_int(value, key));
  else if (key == "k") config.k = static_cast<int>(detail::parse_int(value, key));
  else if (key == "k_max") config.k_max = static_cast<int>(detail::parse_int(value, key));
  else if (key == "t") config.t = static_cast<int>(detail::parse_int(value, key));
  else if (key == "alpha") config.alpha = detail::parse_double(value, key);
  else if (key == "sigma_w2") config.sigma_w2 = detail::parse_double(value, key);
  else if (key == "lambda") config.lambda_kind = parse_lambda_kind(value);
  else if (key == "smnr_db") config.smnr_db = detail::parse_double_list(value, key);
  else if (key == "kappa") config.kappa = detail::parse_double_list(value, key);
  else if (key == "nu") config.nu = detail::parse_double_list(value, key);
  else if (key == "runs") config.runs = static_cast<int>(detail::parse_int(value, key));
  else if (key == "threads") config.threads = static_cast<int>(detail::parse_int(value, key));
  else if (key == "seed") config.seed = static_cast<std::uint64_t>(detail::parse_int(value, key));
  else if (key == "out") config.output_path = value;
  else if (key == "algorithms") {
    config.algorithms.clear();
    for (const auto& name : detail::split_list(value)) config.algorithms.push_back(parse_algorithm(name));
  } else {
    throw InvalidParameter("config: unknown key '" + key + "'");
  }
}

// Parse the flat config format: one `key = value` per line, `#` starts a
// comment, lists are comma-separated.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = detail::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw InvalidParameter("config: line " + std::to_string(line_no) + " is not 'key = value'");
    apply_setting(config, detail::trim(text.substr(0, eq)), detail::trim(text.substr(eq + 1)));
  }
  return config;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("config: cannot open '" + path + "'");
  return parse_config(in);
}

}  // namespace sparsetrack::bench
