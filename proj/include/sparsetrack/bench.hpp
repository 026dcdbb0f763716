#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sparsetrack/common.hpp"
#include "sparsetrack/config.hpp"
#include "sparsetrack/model.hpp"
#include "sparsetrack/pursuit.hpp"
#include "sparsetrack/rng.hpp"
#include "sparsetrack/tracking.hpp"

namespace sparsetrack::bench {

// Pooled signal and reconstruction-error energies. SRER is the ratio of the
// pooled sums (numerator and denominator are each summed over all snapshots
// and runs before dividing), not a mean of per-run ratios.
struct SrerAccumulator {
  double signal = 0.0;
  double error = 0.0;

  void add(const Vector& truth, const Vector& estimate) {
    signal += truth.squaredNorm();
    error += (truth - estimate).squaredNorm();
  }

  void merge(const SrerAccumulator& other) {
    signal += other.signal;
    error += other.error;
  }

  // Linear ratio; +infinity when the error energy is exactly zero.
  double ratio() const {
    if (error == 0.0) return std::numeric_limits<double>::infinity();
    return signal / error;
  }
};

// SRER of one trajectory as a linear ratio.
inline double srer(const std::vector<Vector>& truth, const std::vector<Vector>& estimates) {
  if (truth.size() != estimates.size())
    throw InvalidDimension("srer: trajectory lengths must match");
  SrerAccumulator acc;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (truth[t].size() != estimates[t].size())
      throw InvalidDimension("srer: state dimensions must match");
    acc.add(truth[t], estimates[t]);
  }
  return acc.ratio();
}

// An infinite SRER (zero reconstruction error) serializes as this dB value
// with the `capped` flag set, keeping the CSV numeric.
inline constexpr double kSrerCapDb = 999.0;

struct ResultRecord {
  std::string algorithm;
  double smnr_db = 0.0;
  double kappa = 0.0;
  double nu = 0.0;
  double srer_db = 0.0;
  bool capped = false;
  int runs = 0;
  std::uint64_t seed = 0;
};

using ResultTable = std::vector<ResultRecord>;

namespace detail {

// Dispatch fn(0..count-1) over a fixed-size worker pool. Results must be
// written to per-index slots; the caller merges them in index order, so the
// output is independent of scheduling.
template <typename Fn>
void run_indexed(int count, int threads, Fn&& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& worker : pool) worker.join();
}

inline std::vector<Vector> estimate_trajectory(Algorithm algorithm,
                                               const model::ProcessRealization& realization,
                                               const model::ModelParams& params,
                                               const Matrix& r_inv,
                                               const std::optional<tracking::PredictorMatrix>& predictor,
                                               const Vector& q_diag) {
  std::vector<Vector> estimates;
  estimates.reserve(realization.measurements.size());
  switch (algorithm) {
    case Algorithm::omp:
      for (const Vector& y : realization.measurements)
        estimates.push_back(pursuit::omp(y, realization.h, params.k_max).x_hat);
      break;
    case Algorithm::dip:
    case Algorithm::rdip: {
      const tracking::PredictionState init{
          Vector::Zero(params.n), params.stationary_variance() * Matrix::Identity(params.n, params.n)};
      const auto variant = algorithm == Algorithm::dip ? tracking::PursuitVariant::plain
                                                       : tracking::PursuitVariant::robust;
      for (const auto& state : tracking::dip_run(realization.measurements, realization.h, r_inv,
                                                 *predictor, q_diag, init, params.k_max, variant))
        estimates.push_back(state.x_hat);
      break;
    }
    case Algorithm::genie:
      for (const auto& state : tracking::genie_kf_run(realization, r_inv, q_diag, params.alpha))
        estimates.push_back(state.x_hat);
      break;
  }
  return estimates;
}

}  // namespace detail

// Run the configured Monte Carlo sweep. Per grid point and run, one stream is
// derived as Stream::for_run(seed, run); the realization and every requested
// algorithm share it, so all algorithms see identical data. Runs may execute
// on `config.threads` workers; per-run energies are merged in run order, so
// the table is byte-identical for any thread count.
inline ResultTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  const bool wants_predictor =
      std::any_of(config.algorithms.begin(), config.algorithms.end(), [](Algorithm a) {
        return a == Algorithm::dip || a == Algorithm::rdip;
      });

  ResultTable table;
  for (int g = 0; g < config.grid_size(); ++g) {
    const GridPoint point = config.grid_point(g);
    const model::ModelParams params = config.model_params(point);
    const model::TransitionMatrix lambda = config.transition_matrix(point);
    std::optional<tracking::PredictorMatrix> predictor;
    if (wants_predictor) predictor.emplace(lambda, params.alpha);
    const Vector q_diag = Vector::Constant(params.n, params.sigma_w2);
    const Matrix r_inv = Matrix::Identity(params.m, params.m) / params.sigma_n2;

    const std::size_t n_algorithms = config.algorithms.size();
    std::vector<std::vector<SrerAccumulator>> partials(
        static_cast<std::size_t>(config.runs), std::vector<SrerAccumulator>(n_algorithms));
    std::vector<std::string> failures(static_cast<std::size_t>(config.runs));

    detail::run_indexed(config.runs, config.threads, [&](int run) {
      try {
        auto stream = rng::Stream::for_run(config.seed, static_cast<std::uint64_t>(run));
        const auto realization = model::simulate(params, lambda, stream);
        for (std::size_t a = 0; a < n_algorithms; ++a) {
          const auto estimates = detail::estimate_trajectory(config.algorithms[a], realization,
                                                             params, r_inv, predictor, q_diag);
          for (std::size_t t = 0; t < realization.states.size(); ++t)
            partials[static_cast<std::size_t>(run)][a].add(realization.states[t], estimates[t]);
        }
      } catch (const std::exception& e) {
        failures[static_cast<std::size_t>(run)] = e.what();
      }
    });

    for (int run = 0; run < config.runs; ++run)
      if (!failures[static_cast<std::size_t>(run)].empty())
        throw NumericError("sweep aborted at run " + std::to_string(run) + " of grid point " +
                           std::to_string(g) + " (master seed " + std::to_string(config.seed) +
                           "): " + failures[static_cast<std::size_t>(run)]);

    for (std::size_t a = 0; a < n_algorithms; ++a) {
      SrerAccumulator pooled;
      for (int run = 0; run < config.runs; ++run) pooled.merge(partials[static_cast<std::size_t>(run)][a]);
      ResultRecord record;
      record.algorithm = to_string(config.algorithms[a]);
      record.smnr_db = point.smnr_db;
      record.kappa = point.kappa;
      record.nu = point.nu;
      record.runs = config.runs;
      record.seed = config.seed;
      const double ratio = pooled.ratio();
      record.capped = !std::isfinite(ratio);
      record.srer_db = record.capped ? kSrerCapDb : linear_to_db(ratio);
      table.push_back(std::move(record));
    }
  }
  return table;
}

inline std::string to_csv(const ResultTable& table) {
  std::string out = "algorithm,smnr_db,kappa,nu,srer_db,capped,runs,seed\n";
  char line[256];
  for (const auto& r : table) {
    std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f,%.6f,%d,%d,%llu\n", r.algorithm.c_str(),
                  r.smnr_db, r.kappa, r.nu, r.srer_db, r.capped ? 1 : 0, r.runs,
                  static_cast<unsigned long long>(r.seed));
    out += line;
  }
  return out;
}

// When `path` is relative, the SPARSETRACK_OUT_DIR environment variable, if
// set, names the directory it is resolved against.
inline std::string resolve_output_path(const std::string& path) {
  if (path.empty() || path.front() == '/') return path;
  const char* dir = std::getenv("SPARSETRACK_OUT_DIR");
  if (dir == nullptr || *dir == '\0') return path;
  std::string resolved(dir);
  if (resolved.back() != '/') resolved += '/';
  return resolved + path;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParameter("cannot open output file '" + path + "'");
  out << content;
}

inline void write_csv(const std::string& path, const ResultTable& table) {
  write_file(path, to_csv(table));
}

// Debug dump of one realization as a CSV bundle: <prefix>_states.csv and
// <prefix>_measurements.csv hold one row per snapshot with full-precision
// (%.17g) values; <prefix>_supports.csv holds the sorted support indices.
inline void write_realization_bundle(const model::ProcessRealization& realization,
                                     const std::string& prefix) {
  char num[32];
  auto row_of = [&num](const Vector& v) {
    std::string row;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      std::snprintf(num, sizeof num, "%.17g", v[i]);
      if (i > 0) row += ',';
      row += num;
    }
    row += '\n';
    return row;
  };

  std::string states, measurements, supports;
  for (const auto& x : realization.states) states += row_of(x);
  for (const auto& y : realization.measurements) measurements += row_of(y);
  for (const auto& support : realization.supports) {
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (i > 0) supports += ',';
      supports += std::to_string(support[i]);
    }
    supports += '\n';
  }
  write_file(prefix + "_states.csv", states);
  write_file(prefix + "_measurements.csv", measurements);
  write_file(prefix + "_supports.csv", supports);
}

}  // namespace sparsetrack::bench
