// Copyright 2026 The riskcert Authors
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

// Command implementations behind the `riskcert` tool. They write to caller
// supplied streams so tests can drive them without a process boundary.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "riskcert/certify.hpp"
#include "riskcert/error.hpp"
#include "riskcert/oracle.hpp"
#include "riskcert/scene.hpp"
#include "riskcert/scene_io.hpp"

namespace riskcert::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,
  kExitCompute = 3,
};

struct RunConfig {
  std::string command;
  std::string scene_path;
  Method method = Method::kTwoShot;
  double eps_tol = 1e-6;
  /// Bench only: tolerances to sweep. Empty means {eps_tol}.
  std::vector<double> tols;
  std::int64_t samples = 100000;
  std::uint64_t seed = 0;
  std::int64_t repeat = 10000;
  std::vector<double> alphas{1.0};
  std::vector<int> links{4};
  std::vector<int> obstacles{1};
  bool csv = false;
  std::string out_path;
  unsigned threads = 1;
};

/// Thrown for bad flag values; maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::optional<Method> parse_method(std::string_view s) {
  if (s == "one-shot") return Method::kOneShot;
  if (s == "two-shot") return Method::kTwoShot;
  return std::nullopt;
}

inline const char* method_flag(Method m) {
  return m == Method::kOneShot ? "one-shot" : "two-shot";
}

/// Splits "a,b,c"; each item goes through `convert`.
template <class T, class Convert>
std::vector<T> parse_list(std::string_view text, const char* flag,
                          Convert&& convert) {
  std::vector<T> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string item(text.substr(start, comma - start));
    try {
      std::size_t used = 0;
      out.push_back(convert(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError(std::string("bad value '") + item + "' in " + flag);
    }
    start = comma + 1;
  }
  return out;
}

inline std::vector<double> parse_doubles(std::string_view text, const char* flag) {
  return parse_list<double>(text, flag, [](const std::string& s, std::size_t* n) {
    return std::stod(s, n);
  });
}

inline std::vector<int> parse_ints(std::string_view text, const char* flag) {
  return parse_list<int>(text, flag, [](const std::string& s, std::size_t* n) {
    return std::stoi(s, n);
  });
}

inline void validate_config(const RunConfig& c) {
  auto tol_ok = [](double t) { return t > 0.0 && t <= 0.5; };
  if (!tol_ok(c.eps_tol)) throw UsageError("--tol must lie in (0, 0.5]");
  for (double t : c.tols) {
    if (!tol_ok(t)) throw UsageError("--tol values must lie in (0, 0.5]");
  }
  if (c.samples < 1) throw UsageError("--samples must be >= 1");
  if (c.repeat < 1) throw UsageError("--repeat must be >= 1");
  for (double a : c.alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw UsageError("--alphas must be > 0");
  }
  for (int n : c.links) {
    if (n < 1) throw UsageError("--links values must be >= 1");
  }
  for (int n : c.obstacles) {
    if (n < 1) throw UsageError("--obstacles values must be >= 1");
  }
  if (c.command != "bench" && c.scene_path.empty()) {
    throw UsageError("--scene is required for " + c.command);
  }
}

inline std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline double micros(std::chrono::nanoseconds ns) {
  return std::chrono::duration<double, std::micro>(ns).count();
}

/// Left-aligned text table for human output.
class Table {
 public:
  explicit Table(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void print(std::ostream& os) const {
    std::vector<std::size_t> width(rows_.front().size(), 0);
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        width[i] = std::max(width[i], row[i].size());
      }
    }
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        os << row[i];
        if (i + 1 < row.size()) os << std::string(width[i] - row[i].size() + 2, ' ');
      }
      os << '\n';
    }
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

namespace detail {

inline CertifyOptions options_for(double eps_tol) {
  CertifyOptions opt;
  opt.eps_tol = eps_tol;
  return opt;
}

inline const char* saturation(const CertifiedBound& b) {
  return b.saturated_low || b.saturated_high ? "true" : "false";
}

inline McEstimate oracle_for(const std::vector<ConvexBody>& links,
                             const UncertainObstacle& obstacle,
                             const RunConfig& c) {
  const auto n = static_cast<std::uint64_t>(c.samples);
  if (links.empty()) return make_estimate(0, n, c.seed);
  return mc_collision_probability(links, obstacle, n, c.seed, c.threads);
}

// Ring scene used for timing: a sphere of radius 0.5 at the origin, small
// box links on a circle of radius 1, isotropic sigma = 0.1 m. The sphere
// keeps replicated (rotated) obstacles geometrically identical.
inline Scene bench_scene(int n_links, int n_obstacles) {
  Scene scene = gen_ring_scene(make_sphere(0.5), n_links, 1.0);
  return replicate_obstacle(std::move(scene), n_obstacles);
}

}  // namespace detail

inline int cmd_certify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Scene scene = load_scene(c.scene_path);
  const RiskReport report =
      certify_scene(scene, c.method, detail::options_for(c.eps_tol), c.threads);
  (void)err;
  if (c.csv) {
    out << "obstacle,method,eps,eps1,eps2,eps_lo,eps_hi,saturated,checks,micros\n";
    for (std::size_t i = 0; i < report.per_obstacle.size(); ++i) {
      const CertifiedBound& b = report.per_obstacle[i];
      out << report.obstacle_names[i] << ',' << method_name(b.method) << ','
          << num(b.epsilon) << ',' << num(b.eps1) << ',' << num(b.eps2) << ','
          << num(b.eps_lower) << ',' << num(b.eps_upper) << ','
          << detail::saturation(b) << ',' << b.collision_checks << ','
          << fixed(micros(b.elapsed), 3) << '\n';
    }
    out << "*," << method_flag(c.method) << ',' << num(report.scene_bound)
        << ",,,,,,,\n";
    return kExitOk;
  }
  Table table({"obstacle", "method", "eps", "eps1", "eps2", "bracket",
               "saturated", "checks", "micros"});
  for (std::size_t i = 0; i < report.per_obstacle.size(); ++i) {
    const CertifiedBound& b = report.per_obstacle[i];
    std::string sat = "no";
    if (b.saturated_low) sat = "low";
    if (b.saturated_high) sat = "high";
    table.add({report.obstacle_names[i], method_name(b.method), num(b.epsilon),
               num(b.eps1), num(b.eps2),
               "[" + num(b.eps_lower) + ", " + num(b.eps_upper) + "]", sat,
               std::to_string(b.collision_checks),
               fixed(micros(b.elapsed), 1)});
  }
  table.print(out);
  out << "scene bound (sum over obstacles): " << num(report.scene_bound) << '\n';
  return kExitOk;
}

inline int cmd_oracle(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Scene scene = load_scene(c.scene_path);
  validate_scene(scene);
  (void)err;
  const std::vector<ConvexBody> links = scene.link_bodies();
  if (c.csv) out << "obstacle,estimate,ci3,samples,seed\n";
  Table table({"obstacle", "estimate", "ci3", "samples", "seed"});
  for (const SceneObstacle& obs : scene.obstacles) {
    const McEstimate e = detail::oracle_for(links, obs.obstacle, c);
    std::vector<std::string> row{obs.name, num(e.estimate),
                                 num(e.ci_half_width_3sigma),
                                 std::to_string(e.samples), std::to_string(e.seed)};
    if (c.csv) {
      out << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3] << ','
          << row[4] << '\n';
    } else {
      table.add(std::move(row));
    }
  }
  if (!c.csv) table.print(out);
  return kExitOk;
}

inline double relative_error(double eps, double truth) {
  if (truth > 0.0) return eps / truth - 1.0;
  return eps > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

inline int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Scene base = load_scene(c.scene_path);
  validate_scene(base);
  (void)err;
  const CertifyOptions opt = detail::options_for(c.eps_tol);
  const std::vector<ConvexBody> links = base.link_bodies();
  Table table({"alpha", "obstacle", "eps_one_shot", "eps_two_shot", "eps_mc",
               "rel_err_one", "rel_err_two"});
  if (c.csv) {
    out << "alpha,obstacle,eps_one_shot,eps_two_shot,eps_mc,rel_err_one,"
           "rel_err_two\n";
  }
  for (double alpha : c.alphas) {
    const Scene scene = scale_covariances(base, alpha);
    const RiskReport one = certify_scene(scene, Method::kOneShot, opt, c.threads);
    const RiskReport two = certify_scene(scene, Method::kTwoShot, opt, c.threads);
    for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
      const double e1 = one.per_obstacle[i].epsilon;
      const double e2 = two.per_obstacle[i].epsilon;
      const double mc = detail::oracle_for(links, scene.obstacles[i].obstacle, c).estimate;
      std::vector<std::string> row{num(alpha), scene.obstacles[i].name, num(e1),
                                   num(e2), num(mc), num(relative_error(e1, mc)),
                                   num(relative_error(e2, mc))};
      if (c.csv) {
        for (std::size_t k = 0; k < row.size(); ++k) {
          out << row[k] << (k + 1 < row.size() ? ',' : '\n');
        }
      } else {
        table.add(std::move(row));
      }
    }
  }
  if (!c.csv) table.print(out);
  return kExitOk;
}

/// Mean certification time per obstacle over `repeat` passes of the scene.
/// Only the certification call is timed.
inline double bench_mean_micros(const Scene& scene, Method method,
                                double eps_tol, std::int64_t repeat) {
  const CertifyOptions opt = detail::options_for(eps_tol);
  const std::vector<ConvexBody> links = scene.link_bodies();
  std::chrono::nanoseconds total{0};
  for (std::int64_t r = 0; r < repeat; ++r) {
    for (const SceneObstacle& obs : scene.obstacles) {
      const auto start = std::chrono::steady_clock::now();
      const CertifiedBound b = certify(method, links, obs.obstacle, opt);
      total += std::chrono::steady_clock::now() - start;
      if (b.epsilon < 0.0) std::abort();  // keeps the call observable
    }
  }
  return micros(total) / (static_cast<double>(repeat) *
                          static_cast<double>(scene.obstacles.size()));
}

inline int cmd_bench(const RunConfig& c, std::ostream& out, std::ostream& err) {
  (void)err;
  const std::vector<double> tols =
      c.tols.empty() ? std::vector<double>{c.eps_tol} : c.tols;
  if (c.csv) out << "links,obstacles,tol,mean_micros_per_obstacle,method\n";
  Table table({"links", "obstacles", "tol", "mean_micros_per_obstacle", "method"});
  for (int n_links : c.links) {
    for (int n_obs : c.obstacles) {
      const Scene scene = detail::bench_scene(n_links, n_obs);
      for (double tol : tols) {
        const double us = bench_mean_micros(scene, c.method, tol, c.repeat);
        std::vector<std::string> row{std::to_string(n_links),
                                     std::to_string(n_obs), num(tol),
                                     fixed(us, 3), method_flag(c.method)};
        if (c.csv) {
          for (std::size_t k = 0; k < row.size(); ++k) {
            out << row[k] << (k + 1 < row.size() ? ',' : '\n');
          }
        } else {
          table.add(std::move(row));
        }
      }
    }
  }
  if (!c.csv) table.print(out);
  return kExitOk;
}

inline bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSyntaxError:
    case ErrorCode::kUnknownShape:
    case ErrorCode::kDuplicateName:
    case ErrorCode::kInvalidField:
    case ErrorCode::kUnsupportedVersion:
    case ErrorCode::kIoError:
    case ErrorCode::kAsymmetricMatrix:
    case ErrorCode::kNonPsdCovariance:
    case ErrorCode::kNonOrthonormalRotation:
    case ErrorCode::kNonFinite:
      return true;
    default:
      return false;
  }
}

/// Runs `c.command`, mapping failures to exit codes. When `out_path` is set
/// the report goes there instead of `out`.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    validate_config(c);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  std::ofstream file;
  std::ostringstream buffer;
  std::ostream& sink = c.out_path.empty() ? out : static_cast<std::ostream&>(buffer);
  int code = kExitOk;
  try {
    if (c.command == "certify") {
      code = cmd_certify(c, sink, err);
    } else if (c.command == "oracle") {
      code = cmd_oracle(c, sink, err);
    } else if (c.command == "sweep") {
      code = cmd_sweep(c, sink, err);
    } else if (c.command == "bench") {
      code = cmd_bench(c, sink, err);
    } else {
      err << "usage error: unknown command '" << c.command << "'\n";
      return kExitUsage;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_input_error(e.code()) ? kExitInput : kExitCompute;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCompute;
  }
  if (!c.out_path.empty()) {
    file.open(c.out_path, std::ios::binary);
    if (!file || !(file << buffer.str())) {
      err << "error: cannot write " << c.out_path << '\n';
      return kExitInput;
    }
  }
  return code;
}

}  // namespace riskcert::cli
