// Copyright 2026 The spatialtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// The five command-line workflows as plain functions. Each returns the
// process exit code and writes human-readable text to `out`, diagnostics to
// `err`. tools/spatialtomo.cpp only parses flags.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spatialtomo/errors.hpp"
#include "spatialtomo/geometry.hpp"
#include "spatialtomo/io.hpp"
#include "spatialtomo/measurement.hpp"
#include "spatialtomo/mle.hpp"
#include "spatialtomo/propagation.hpp"
#include "spatialtomo/states.hpp"
#include "spatialtomo/tomography.hpp"

namespace spatialtomo::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kNumerical = 3,
  kBoundViolation = 4,
};

namespace detail {

// Runs body and maps library exceptions onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const GeometryError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ReconstructionError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const QuadratureError& e) {
    err << "error: quadrature: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline DensityMatrix true_state(const io::RunConfig& cfg, const DerivedGeometry& d) {
  return to_density(build_state(cfg.pump, d));
}

inline std::optional<DensityMatrix> reference_state(const io::RunConfig& cfg,
                                                    const DerivedGeometry& d,
                                                    const std::optional<std::string>& flag) {
  const auto& ref = flag ? flag : cfg.reference;
  if (!ref) return std::nullopt;
  if (!flag && *ref == "pump") return true_state(cfg, d);
  return io::read_density(*ref);
}

inline SimulationOptions simulation_options(const io::RunConfig& cfg) {
  SimulationOptions o;
  o.R0 = cfg.calibration.R0_hz;
  o.base_time = cfg.calibration.time_s;
  o.exposure = cfg.calibration.exposure;
  o.seed = cfg.noise.seed;
  o.noiseless = cfg.noise.noiseless;
  return o;
}

}  // namespace detail

inline std::optional<Method> parse_method(const std::string& name) {
  if (name == "exact") return Method::exact_linear;
  if (name == "paper") return Method::paper_form;
  if (name == "mle") return Method::mle;
  return std::nullopt;
}

inline ReconstructionResult reconstruct(const CountRecord& rec, Method method,
                                        const DerivedGeometry& d, const io::RunConfig& cfg) {
  switch (method) {
    case Method::exact_linear:
      return invert_exact(rec, d);
    case Method::paper_form:
      return invert_paper(rec, d);
    case Method::mle:
      return mle(rec, d, cfg.mle);
  }
  throw ContractError("unknown method");
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out;
  bool noiseless = false;
  std::optional<std::uint64_t> seed;
};

// Writes the record as JSON, or as the CSV mirror when `out` ends in .csv.
inline int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto cfg = io::read_run_config(args.config);
    const auto d = derive_params(cfg.geometry);
    for (const auto& w : validate(cfg.geometry).warnings) err << "warning: " << w << "\n";
    auto opts = detail::simulation_options(cfg);
    if (args.noiseless) opts.noiseless = true;
    if (args.seed) opts.seed = *args.seed;
    const auto rho = detail::true_state(cfg, d);
    const auto rec = simulate_counts(rho, standard_settings(d), d, opts);
    io::write_text_file(args.out, detail::ends_with(args.out, ".csv") ? io::to_csv(rec)
                                                                      : io::dump(io::to_json(rec)));

    const auto rates = expected_rates(rho, rec.settings(), d, opts.R0);
    out << std::left << std::setw(4) << "id" << std::setw(16) << "signal" << std::setw(16)
        << "idler" << std::setw(14) << "time_s" << std::setw(14) << "rate_hz" << "counts\n";
    for (std::size_t k = 0; k < rec.entries.size(); ++k) {
      const auto& e = rec.entries[k];
      std::ostringstream t, r;
      t << std::setprecision(6) << e.time;
      r << std::setprecision(6) << rates[k];
      out << std::setw(4) << e.setting.id << std::setw(16) << io::arm_label(e.setting.signal)
          << std::setw(16) << io::arm_label(e.setting.idler) << std::setw(14) << t.str()
          << std::setw(14) << r.str() << e.counts << "\n";
    }
    out << "wrote " << args.out << "\n";
    return static_cast<int>(kOk);
  });
}

// ---- reconstruct ----------------------------------------------------------

struct ReconstructArgs {
  std::string counts;
  std::string method;
  std::string config;
  std::string out;
  std::optional<std::string> reference;
};

inline int cmd_reconstruct(const ReconstructArgs& args, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto method = parse_method(args.method);
    if (!method) throw ConfigError("method: expected exact, paper or mle, got '" + args.method + "'");
    const auto cfg = io::read_run_config(args.config);
    const auto d = derive_params(cfg.geometry);
    const auto rec = io::count_record_from_json(io::read_json_file(args.counts));
    if (rec.chi > 0.0 && std::abs(rec.chi - d.chi) > 1e-9 * d.chi)
      err << "warning: record was simulated with chi=" << io::fmt(rec.chi)
          << ", config geometry gives chi=" << io::fmt(d.chi) << "\n";

    const auto res = reconstruct(rec, *method, d, cfg);
    io::write_text_file(args.out, io::dump(io::to_json(res)));

    out << "method " << to_string(res.method) << "\n";
    out << "residual " << io::fmt(res.residual) << "\n";
    out << "physical " << (res.is_physical() ? "true" : "false") << "\n";
    if (const auto ref = detail::reference_state(cfg, d, args.reference)) {
      out << "fidelity " << io::fmt(fidelity(ref->matrix(), res.rho_hat)) << "\n";
    }
    if (res.converged && !*res.converged) {
      err << "error: MLE did not converge after " << res.iterations << " iterations\n";
      return static_cast<int>(kNumerical);
    }
    return static_cast<int>(kOk);
  });
}

// ---- compare --------------------------------------------------------------

inline int cmd_compare(const std::string& a_path, const std::string& b_path, std::ostream& out,
                       std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto a = io::read_density(a_path);
    const auto b = io::read_density(b_path);
    out << "fidelity " << io::fmt(fidelity(a, b)) << "\n";
    out << "trace_distance " << io::fmt(trace_distance(a.matrix(), b.matrix())) << "\n";
    out << "purity_a " << io::fmt(purity(a)) << "\n";
    out << "purity_b " << io::fmt(purity(b)) << "\n";
    out << "concurrence_a " << io::fmt(concurrence(a.matrix())) << "\n";
    out << "concurrence_b " << io::fmt(concurrence(b.matrix())) << "\n";
    return static_cast<int>(kOk);
  });
}

// ---- oracle ---------------------------------------------------------------

struct OracleArgs {
  std::string config;
  std::optional<std::string> grid;
  std::string out;
};

inline std::string oracle_csv(const std::vector<OracleRow>& rows) {
  std::ostringstream os;
  os << "x_mm,q_per_mm,sign,re_closed,im_closed,re_quad,im_quad,rel_err\n";
  for (const auto& r : rows) {
    os << io::fmt(r.x / io::kMm) << "," << io::fmt(r.q * io::kMm) << ","
       << (r.sign == PhaseSign::plus ? "+" : "-") << "," << io::fmt(r.closed.real()) << ","
       << io::fmt(r.closed.imag()) << "," << io::fmt(r.quadrature.real()) << ","
       << io::fmt(r.quadrature.imag()) << "," << io::fmt(r.rel_err) << "\n";
  }
  return os.str();
}

inline int cmd_oracle(const OracleArgs& args, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto cfg = io::read_run_config(args.config);
    const auto d = derive_params(cfg.geometry);
    const OracleGrid grid =
        args.grid ? io::oracle_grid_from_json(io::read_json_file(*args.grid)) : default_oracle_grid(d);
    if (grid.x.empty() || grid.q.empty()) throw ConfigError("grid: x_mm and q_per_mm must be nonempty");
    const auto rows = compare_closed_form(grid, d, cfg.oracle.tol);
    io::write_text_file(args.out, oracle_csv(rows));

    double worst = 0.0;
    int failed = 0;
    for (const auto& r : rows) {
      worst = std::max(worst, r.rel_err);
      if (!(r.rel_err <= cfg.oracle.max_rel_err)) {
        ++failed;
        out << "exceeds bound: x_mm=" << io::fmt(r.x / io::kMm)
            << " q_per_mm=" << io::fmt(r.q * io::kMm) << " sign=" << (r.sign == PhaseSign::plus ? "+" : "-")
            << " rel_err=" << io::fmt(r.rel_err) << "\n";
      }
    }
    out << rows.size() << " points, max rel_err " << io::fmt(worst) << ", bound "
        << io::fmt(cfg.oracle.max_rel_err) << "\n";
    return static_cast<int>(failed ? kBoundViolation : kOk);
  });
}

// ---- sweep ----------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::string var;  // counts_per_setting | trials
  std::string range;
  int trials = 1;
  std::string out;
};

// "lo:hi:n" gives n log-spaced points, "a,b,c" an explicit list.
inline std::vector<double> parse_range(const std::string& text) {
  auto number = [&](const std::string& tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || !std::isfinite(v) || !(v > 0.0))
      throw ConfigError("range: '" + tok + "' is not a positive number");
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError("range: expected lo:hi:n");
    const double lo = number(parts[0]), hi = number(parts[1]);
    const double n = number(parts[2]);
    if (n != std::floor(n)) throw ConfigError("range: point count must be an integer");
    const int count = static_cast<int>(n);
    for (int i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      out.push_back(i == count - 1 && count > 1 ? hi : lo * std::pow(hi / lo, f));
    }
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  }
  if (out.empty()) throw ConfigError("range: empty");
  return out;
}

struct SweepStats {
  double mean = 0.0, min = 0.0, max = 0.0, stddev = 0.0;
};

inline SweepStats summarize(const std::vector<double>& v) {
  SweepStats s;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return s;
}

// Fidelity of every enabled method for one noisy trial.
inline std::vector<double> sweep_trial(const io::RunConfig& cfg, const DerivedGeometry& d,
                                       const DensityMatrix& truth, double counts_per_setting,
                                       std::uint64_t seed, const std::vector<Method>& methods) {
  auto opts = detail::simulation_options(cfg);
  opts.base_time = base_time_for_counts(counts_per_setting, opts.R0);
  opts.noiseless = false;
  opts.seed = seed;
  const auto rec = simulate_counts(truth, standard_settings(d), d, opts);
  std::vector<double> f;
  for (Method m : methods) f.push_back(fidelity(truth.matrix(), reconstruct(rec, m, d, cfg).rho_hat));
  return f;
}

inline int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto cfg = io::read_run_config(args.config);
    const auto d = derive_params(cfg.geometry);
    if (args.var != "counts_per_setting" && args.var != "trials")
      throw ConfigError("var: expected counts_per_setting or trials");
    if (args.trials < 1) throw ConfigError("trials: must be >= 1");
    const auto values = parse_range(args.range);
    const auto truth = detail::true_state(cfg, d);

    std::vector<Method> methods = {Method::exact_linear, Method::paper_form};
    if (cfg.mle_enabled) methods.push_back(Method::mle);

    std::ostringstream csv;
    csv << args.var << ",trials";
    for (Method m : methods)
      for (const char* col : {"mean", "min", "max", "std"}) csv << "," << to_string(m) << "_" << col;
    csv << "\n";

    const double default_counts = cfg.calibration.R0_hz * cfg.calibration.time_s / 4.0;
    for (double v : values) {
      const double counts = args.var == "counts_per_setting" ? v : default_counts;
      const int trials = args.var == "trials" ? static_cast<int>(std::llround(v)) : args.trials;
      if (trials < 1) throw ConfigError("range: trial count must be >= 1");

      // Trial i always uses seed base + i, whichever thread runs it.
      std::vector<std::vector<double>> fid(static_cast<std::size_t>(trials));
      std::vector<std::exception_ptr> errors(fid.size());
      std::atomic<int> next{0};
      auto worker = [&] {
        for (int i; (i = next.fetch_add(1)) < trials;) {
          try {
            fid[i] = sweep_trial(cfg, d, truth, counts, cfg.noise.seed + static_cast<std::uint64_t>(i),
                                 methods);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      };
      const int nthreads = std::min(cfg.threads, trials);
      if (nthreads <= 1) {
        worker();
      } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
      }
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);

      csv << io::fmt(v) << "," << trials;
      for (std::size_t m = 0; m < methods.size(); ++m) {
        std::vector<double> col;
        for (const auto& f : fid) col.push_back(f[m]);
        const auto s = summarize(col);
        csv << "," << io::fmt(s.mean) << "," << io::fmt(s.min) << "," << io::fmt(s.max) << ","
            << io::fmt(s.stddev);
      }
      csv << "\n";
      out << args.var << "=" << io::fmt(v) << " done (" << trials << " trials)\n";
    }
    io::write_text_file(args.out, csv.str());
    return static_cast<int>(kOk);
  });
}

}  // namespace spatialtomo::cli
