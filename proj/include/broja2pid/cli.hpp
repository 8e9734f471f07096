#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "broja2pid/distributions.hpp"
#include "broja2pid/errors.hpp"
#include "broja2pid/gates.hpp"
#include "broja2pid/pid.hpp"

namespace broja2pid::cli {

inline constexpr std::uint64_t kDefaultSeed = 20170707;

/// Default sweep seed; BROJA2PID_SEED overrides it.
inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("BROJA2PID_SEED")) {
    std::uint64_t v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec != std::errc() || ptr != end) {
      throw InvalidParams(std::string("BROJA2PID_SEED is not an integer: ") + env);
    }
    return v;
  }
  return kDefaultSeed;
}

/// Integer if the whole token is one, string otherwise.
inline Symbol parse_label(const std::string& token) {
  std::int64_t v = 0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (!token.empty() && ec == std::errc() && ptr == end) return Symbol(v);
  return Symbol(token);
}

inline Symbol label_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Symbol(j.get<std::int64_t>());
  if (j.is_string()) return parse_label(j.get<std::string>());
  throw ParseError("label must be an integer or a string: " + j.dump());
}

inline void add_outcome(RawDistribution& out, Symbol x, Symbol y, Symbol z, double p) {
  Outcome o{std::move(x), std::move(y), std::move(z)};
  if (out.count(o)) throw ParseError("duplicate outcome (" + o.x.to_string() + ", " +
                                     o.y.to_string() + ", " + o.z.to_string() + ")");
  out.emplace(std::move(o), p);
}

/// Either a JSON array of {"x","y","z","p"} records or a whitespace table of
/// `x y z p` rows (blank lines and lines starting with '#' skipped).
inline RawDistribution parse_distribution(const std::string& text) {
  RawDistribution out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what());
    }
    if (doc.is_object() && doc.contains("records")) doc = doc["records"];
    if (!doc.is_array()) throw ParseError("expected an array of records");
    for (const auto& rec : doc) {
      if (!rec.is_object()) throw ParseError("record is not an object");
      for (const char* k : {"x", "y", "z", "p"}) {
        if (!rec.contains(k)) throw ParseError(std::string("record lacks key ") + k);
      }
      if (!rec["p"].is_number()) throw ParseError("p must be a number");
      add_outcome(out, label_from_json(rec["x"]), label_from_json(rec["y"]),
                  label_from_json(rec["z"]), rec["p"].get<double>());
    }
  } else {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos || line[b] == '#') continue;
      std::istringstream row(line);
      std::string x, y, z, p, extra;
      if (!(row >> x >> y >> z >> p) || (row >> extra)) {
        throw ParseError("line " + std::to_string(lineno) + ": expected `x y z p`");
      }
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(p, &used);
        if (used != p.size()) throw std::invalid_argument(p);
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineno) + ": bad probability " + p);
      }
      add_outcome(out, parse_label(x), parse_label(y), parse_label(z), v);
    }
  }
  if (out.empty()) throw ParseError("no outcomes");
  return out;
}

inline RawDistribution read_distribution_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_distribution(ss.str());
}

/// Per-instance results and sweep means.
struct RunReport {
  std::vector<PidResult> results;
  std::vector<double> seconds;
  int failures = 0;

  double mean(double PidResult::*field) const {
    if (results.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : results) s += r.*field;
    return s / static_cast<double>(results.size());
  }
  double mean_time() const {
    if (seconds.empty()) return 0.0;
    double s = 0.0;
    for (double v : seconds) s += v;
    return s / static_cast<double>(seconds.size());
  }
};

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

template <class F>
inline double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void print_summary(std::ostream& out, const PidResult& r) {
  out << "# status " << to_string(r.status) << ", " << r.iterations
      << " iterations, " << r.newton_steps << " Newton steps";
  if (!r.detail.empty()) out << " (" << r.detail << ")";
  out << "\n";
  if (r.consistency_warning) {
    out << "# warning: SI cross-check MI(X;Z) - UIZ = " << fmt(r.si_cross_check)
        << " differs from SI\n";
  }
}

}  // namespace detail

/// Single distribution from a file. Exit 1 on parse or validation failure,
/// 2 on solver failure.
inline int cmd_pid(const std::string& path, const SolverParams& params,
                   int output_mode, std::ostream& out, std::ostream& err) {
  RawDistribution raw;
  try {
    params.validate();
    if (output_mode < 0 || output_mode > 2) {
      throw InvalidParams("output mode must be 0, 1 or 2");
    }
    raw = read_distribution_file(path);
    build_distribution(raw);
  } catch (const Exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    const auto r = pid(raw, params, output_mode, &out);
    if (output_mode >= 1) detail::print_summary(out, r);
  } catch (const Exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

/// Runs the seven gates and prints each result with its deviation from the
/// reference values.
inline int cmd_gates(const SolverParams& params, int output_mode, std::ostream& out,
                     std::ostream& err, RunReport* report = nullptr) {
  int code = 0;
  for (const auto& name : gate_names()) {
    out << "# gate " << name << "\n";
    PidResult r;
    double secs = 0.0;
    try {
      secs = detail::timed([&] { r = pid(gate(name), params, output_mode, &out); });
    } catch (const Exception& e) {
      err << "error: gate " << name << ": " << e.what() << "\n";
      code = 2;
      if (report) ++report->failures;
      continue;
    }
    const auto ref = gate_reference(name);
    const double dev = std::max({std::abs(r.si - ref.si), std::abs(r.uiy - ref.uiy),
                                 std::abs(r.uiz - ref.uiz), std::abs(r.ci - ref.ci)});
    if (output_mode >= 1) detail::print_summary(out, r);
    out << "# deviation " << fmt(dev) << " bits, time " << fmt(secs) << " s\n";
    if (report) {
      report->results.push_back(r);
      report->seconds.push_back(secs);
    }
  }
  return code;
}

/// Relative deviation, or the absolute one when the reference is 0.
inline double relative_deviation(double value, double reference) {
  const double d = std::abs(value - reference);
  return reference == 0.0 ? d : d / std::abs(reference);
}

inline int cmd_copy(int m, int n, const SolverParams& params, int output_mode,
                    std::ostream& out, std::ostream& err,
                    RunReport* report = nullptr) {
  RawDistribution raw;
  try {
    raw = copy_gate(m, n);
  } catch (const Exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  PidResult r;
  double secs = 0.0;
  try {
    secs = detail::timed([&] { r = pid(raw, params, output_mode, &out); });
  } catch (const Exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  if (output_mode >= 1) detail::print_summary(out, r);
  out << "# COPY(" << m << "," << n << ") time " << fmt(secs) << " s, UIY deviation "
      << fmt(relative_deviation(r.uiy, std::log2(m))) << ", UIZ deviation "
      << fmt(relative_deviation(r.uiz, std::log2(n))) << "\n";
  if (report) {
    report->results.push_back(r);
    report->seconds.push_back(secs);
  }
  return 0;
}

/// Solves count seeded random instances (instance k uses seed + k), then
/// prints CSV aggregates. Instances run on `jobs` threads; output stays in
/// instance order. Exit 0 if at least one instance solved.
inline int cmd_randompdf(int nx, int ny, int nz, int count, std::uint64_t seed,
                         const SolverParams& params, int output_mode, int jobs,
                         std::ostream& out, std::ostream& err,
                         RunReport* report = nullptr) {
  try {
    if (nx < 1 || ny < 1 || nz < 1) throw InvalidSize("sizes must be >= 1");
    if (count < 1) throw InvalidSize("count must be >= 1");
    if (jobs < 1) throw InvalidParams("jobs must be >= 1");
    params.validate();
  } catch (const Exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  struct Slot {
    std::string text;
    std::string error;
    PidResult result;
    double seconds = 0.0;
    bool ok = false;
  };
  std::vector<Slot> slots(count);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < count; k = next++) {
      Slot& s = slots[k];
      std::ostringstream buf;
      const std::uint64_t sk = seed + static_cast<std::uint64_t>(k);
      buf << "# instance " << k << " seed " << sk << "\n";
      try {
        const auto raw = random_simplex_distribution(nx, ny, nz, sk);
        s.seconds = detail::timed([&] { s.result = pid(raw, params, output_mode, &buf); });
        if (output_mode >= 1) detail::print_summary(buf, s.result);
        buf << "# time " << fmt(s.seconds) << " s\n";
        s.ok = true;
      } catch (const Exception& e) {
        s.error = e.what();
      }
      s.text = buf.str();
    }
  };
  const int nthreads = std::min(jobs, count);
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  RunReport local;
  RunReport& rep = report ? *report : local;
  for (const auto& s : slots) {
    out << s.text;
    if (s.ok) {
      rep.results.push_back(s.result);
      rep.seconds.push_back(s.seconds);
    } else {
      ++rep.failures;
      err << "error: " << s.error << "\n";
      out << "# failed: " << s.error << "\n";
    }
  }
  out << "nx,ny,nz,count,solved,optimal,mean_SI,mean_UIY,mean_UIZ,mean_CI,mean_time\n";
  const auto optimal = std::count_if(rep.results.begin(), rep.results.end(),
                                     [](const PidResult& r) {
                                       return r.status == SolveStatus::kOptimal;
                                     });
  out << nx << "," << ny << "," << nz << "," << count << "," << rep.results.size()
      << "," << optimal << "," << fmt(rep.mean(&PidResult::si)) << ","
      << fmt(rep.mean(&PidResult::uiy)) << "," << fmt(rep.mean(&PidResult::uiz))
      << "," << fmt(rep.mean(&PidResult::ci)) << "," << fmt(rep.mean_time()) << "\n";
  return rep.results.empty() ? 1 : 0;
}

}  // namespace broja2pid::cli
