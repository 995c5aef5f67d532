#include "ubcn/io/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "ubcn/errors.hpp"
#include "ubcn/io/atomic_file.hpp"

namespace ubcn::io {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

namespace {

/// Rounded to the table precision so the JSON summary matches the CSVs.
double rounded(double v) { return std::stod(format_number(v)); }

class Csv {
 public:
  explicit Csv(std::initializer_list<const char*> header) {
    bool first = true;
    for (const char* h : header) {
      out_ << (first ? "" : ",") << h;
      first = false;
    }
    out_ << '\n';
  }
  Csv& num(double v) { return field(format_number(v)); }
  Csv& integer(std::size_t v) { return field(std::to_string(v)); }
  Csv& text(const std::string& v) {
    return field(v.find_first_of(",\"") == std::string::npos ? v : quote(v));
  }
  Csv& empty() { return field(""); }
  void end() {
    out_ << '\n';
    fresh_ = true;
  }
  std::string str() const { return out_.str(); }

 private:
  Csv& field(const std::string& v) {
    out_ << (fresh_ ? "" : ",") << v;
    fresh_ = false;
    return *this;
  }
  static std::string quote(const std::string& v) {
    std::string q = "\"";
    for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + '"';
  }
  std::ostringstream out_;
  bool fresh_ = true;
};

ordered_json report_json(const Scenario& s, const SolutionReport& r) {
  ordered_json j;
  j["ee"] = rounded(r.ee);
  j["total_throughput"] = rounded(r.total_throughput());
  j["uav_energy"] = rounded(r.uav_energy);
  j["ce_energy"] = rounded(r.ce_energy);
  j["feasible"] = r.feasible();
  ordered_json bds = ordered_json::array();
  for (std::size_t k = 0; k < s.num_bds(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    bds.push_back({{"bd", k},
                   {"ce", s.ce_of(k)},
                   {"throughput", rounded(r.per_bd_throughput(kk))},
                   {"harvested", rounded(r.per_bd_energy(kk))}});
  }
  j["per_bd"] = std::move(bds);
  ordered_json audit = ordered_json::array();
  for (const auto& c : r.constraint_audit)
    audit.push_back({{"id", c.id}, {"slack", rounded(c.slack)}, {"satisfied", c.satisfied}});
  j["audit"] = std::move(audit);
  return j;
}

std::string scheduled_label(const Scenario& s, std::size_t bd) {
  return "(" + std::to_string(s.ce_of(bd)) + "," + std::to_string(s.local_index(bd)) + ")";
}

RunArtifacts paths_in(const fs::path& dir) {
  RunArtifacts a;
  a.summary = dir / "summary.json";
  a.trajectory = dir / "trajectory.csv";
  a.schedule = dir / "schedule.csv";
  a.power = dir / "power.csv";
  a.convergence = dir / "convergence.csv";
  return a;
}

double to_double(const std::string& text, const fs::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number '" + text + "' in " + path.string());
  }
}

std::size_t to_index(const std::string& text, const fs::path& path) {
  const double v = to_double(text, path);
  if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v)))
    throw ConfigError("bad index '" + text + "' in " + path.string());
  return static_cast<std::size_t>(v);
}

/// Column positions by header name; throws when one is missing.
std::vector<std::size_t> columns(const std::vector<std::vector<std::string>>& table, const fs::path& path,
                                 std::initializer_list<const char*> names) {
  if (table.empty()) throw ConfigError("empty table " + path.string());
  std::vector<std::size_t> out;
  for (const char* n : names) {
    std::size_t found = table[0].size();
    for (std::size_t c = 0; c < table[0].size(); ++c)
      if (table[0][c] == n) found = c;
    if (found == table[0].size()) throw ConfigError(std::string("column '") + n + "' missing in " + path.string());
    out.push_back(found);
  }
  return out;
}

}  // namespace

RunArtifacts write_fly_artifacts(const fs::path& dir, const Scenario& s, const BcdResult& result, std::uint64_t seed) {
  const RunArtifacts a = paths_in(dir);
  const Solution& sol = result.solution;
  const std::size_t N = s.num_slots(), M = s.num_ces();
  const UavPhysics& uav = s.params().uav;

  Csv traj({"slot", "x", "y", "speed", "propulsion_power", "scheduled", "ce_power"});
  for (std::size_t n = 0; n <= N; ++n) {
    const auto col = static_cast<Eigen::Index>(n);
    traj.integer(n).num(sol.trajectory(0, col)).num(sol.trajectory(1, col));
    if (n == N) {
      traj.empty().empty().empty().empty().end();
      continue;
    }
    const double v = slot_speed(s, sol.trajectory, n);
    traj.num(v).num(propulsion_power(uav, v));
    if (const auto bd = sol.schedule.scheduled_bd(s, n)) {
      traj.text(scheduled_label(s, *bd)).num(sol.power(static_cast<Eigen::Index>(s.ce_of(*bd)), col));
    } else {
      traj.text("none").empty();
    }
    traj.end();
  }
  write_atomic(a.trajectory, traj.str());

  Csv sched({"index", "ce", "local", "bd", "duration"});
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t k = 0; k < s.num_bds(); ++k)
      if (sol.schedule.of(s, k, n))
        sched.integer(n).integer(s.ce_of(k)).integer(s.local_index(k)).integer(k).num(s.slot_length()).end();
  write_atomic(a.schedule, sched.str());

  Csv pow({"index", "ce", "power"});
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t m = 0; m < M; ++m)
      pow.integer(n).integer(m).num(sol.power(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n))).end();
  write_atomic(a.power, pow.str());

  const ConvergenceTrace& tr = result.trace;
  Csv conv({"iteration", "ee_schedule", "ee_power", "ee_trajectory", "sca_rounds", "max_slack_residual",
            "schedule_proven"});
  conv.integer(0).num(tr.initial_ee).num(tr.initial_ee).num(tr.initial_ee).integer(0).num(0.0).integer(1).end();
  for (const auto& it : tr.iterations)
    conv.integer(it.iteration).num(it.ee_schedule).num(it.ee_power).num(it.ee_trajectory).integer(it.sca_rounds)
        .num(it.max_slack_residual).integer(it.schedule_proven ? 1 : 0)
        .end();
  write_atomic(a.convergence, conv.str());

  ordered_json doc;
  doc["scheme"] = "fly";
  doc["seed"] = seed;
  doc["status"] = tr.status == BcdStatus::Converged ? "converged" : "max_iterations";
  doc["iterations"] = tr.iterations.size();
  doc.update(report_json(s, sol.report));
  ordered_json iters = ordered_json::array();
  for (const auto& it : tr.iterations)
    iters.push_back({{"iteration", it.iteration},
                     {"ee_schedule", rounded(it.ee_schedule)},
                     {"ee_power", rounded(it.ee_power)},
                     {"ee_trajectory", rounded(it.ee_trajectory)},
                     {"sca_rounds", it.sca_rounds},
                     {"max_slack_residual", rounded(it.max_slack_residual)},
                     {"schedule_proven", it.schedule_proven}});
  doc["trace"] = {{"initial_ee", rounded(tr.initial_ee)}, {"iterations", std::move(iters)}};
  write_atomic(a.summary, doc.dump(2) + "\n");
  return a;
}

RunArtifacts write_hover_artifacts(const fs::path& dir, const Scenario& s, const HoverResult& result,
                                   std::uint64_t seed) {
  RunArtifacts a = paths_in(dir);
  a.hover_plan = dir / "hover_plan.csv";
  const HoverPlan& plan = result.plan;
  const std::size_t K = plan.num_stops();
  const double vmax = s.params().v_max;
  const double p_tra = propulsion_power(s.params().uav, vmax);

  Csv traj({"slot", "x", "y", "speed", "propulsion_power", "scheduled", "ce_power"});
  for (std::size_t i = 0; i <= K; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    traj.integer(i).num(plan.positions(0, col)).num(plan.positions(1, col));
    if (i == K) {
      traj.empty().empty().empty().empty().end();
      continue;
    }
    traj.num(vmax).num(p_tra).text(scheduled_label(s, plan.order[i])).num(plan.powers(col)).end();
  }
  write_atomic(a.trajectory, traj.str());

  Csv sched({"index", "ce", "local", "bd", "duration"});
  Csv pow({"index", "ce", "power"});
  Csv hp({"stop", "bd", "ce", "x", "y", "hover_time", "power", "leg_length", "throughput", "harvested"});
  for (std::size_t i = 0; i < K; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const std::size_t bd = plan.order[i];
    sched.integer(i).integer(s.ce_of(bd)).integer(s.local_index(bd)).integer(bd).num(plan.times(ii)).end();
    pow.integer(i).integer(s.ce_of(bd)).num(plan.powers(ii)).end();
    const Point h = plan.hover(i);
    hp.integer(i).integer(bd).integer(s.ce_of(bd)).num(h.x()).num(h.y()).num(plan.times(ii)).num(plan.powers(ii))
        .num(plan.legs(ii))
        .num(benchmark_stop_throughput(s, plan, i))
        .num(benchmark_bd_energy(plan, s, bd))
        .end();
  }
  write_atomic(a.schedule, sched.str());
  write_atomic(a.power, pow.str());
  write_atomic(a.hover_plan, hp.str());

  const HoverTrace& tr = result.trace;
  Csv conv({"iteration", "ee_power", "ee_time", "ee_position", "sca_rounds"});
  conv.integer(0).num(tr.initial_ee).num(tr.initial_ee).num(tr.initial_ee).integer(0).end();
  for (const auto& it : tr.iterations)
    conv.integer(it.iteration).num(it.ee_power).num(it.ee_time).num(it.ee_position).integer(it.sca_rounds).end();
  write_atomic(a.convergence, conv.str());

  ordered_json doc;
  doc["scheme"] = "hover";
  doc["seed"] = seed;
  doc["status"] = tr.converged ? "converged" : "max_iterations";
  doc["iterations"] = tr.iterations.size();
  doc.update(report_json(s, result.report));
  doc["order"] = plan.order;
  ordered_json iters = ordered_json::array();
  for (const auto& it : tr.iterations)
    iters.push_back({{"iteration", it.iteration},
                     {"ee_power", rounded(it.ee_power)},
                     {"ee_time", rounded(it.ee_time)},
                     {"ee_position", rounded(it.ee_position)},
                     {"sca_rounds", it.sca_rounds}});
  doc["trace"] = {{"initial_ee", rounded(tr.initial_ee)}, {"iterations", std::move(iters)}};
  write_atomic(a.summary, doc.dump(2) + "\n");
  return a;
}

void write_error_record(const fs::path& dir, const std::string& status, int exit_code, const std::string& message) {
  ordered_json doc;
  doc["status"] = status;
  doc["exit_code"] = exit_code;
  doc["message"] = message;
  write_atomic(dir / "error.json", doc.dump(2) + "\n");
}

void write_sweep_table(const fs::path& path, const std::vector<SweepRow>& rows) {
  Csv t({"param", "value", "scheme", "status", "ee", "iterations", "throughput", "uav_energy", "ce_energy", "message"});
  for (const auto& r : rows) {
    t.text(r.param).num(r.value).text(r.scheme).text(r.status);
    if (r.status == "ok")
      t.num(r.ee).integer(r.iterations).num(r.throughput).num(r.uav_energy).num(r.ce_energy);
    else
      t.empty().empty().empty().empty().empty();
    t.text(r.message).end();
  }
  write_atomic(path, t.str());
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          row.back() += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          row.back() += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        row.emplace_back();
      } else {
        row.back() += c;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepRow> read_sweep_table(const fs::path& path) {
  const auto table = read_csv(path);
  const auto c = columns(table, path,
                         {"param", "value", "scheme", "status", "ee", "iterations", "throughput", "uav_energy",
                          "ce_energy", "message"});
  std::vector<SweepRow> rows;
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& f = table[r];
    if (f.size() != table[0].size()) throw ConfigError("ragged row in " + path.string());
    SweepRow row;
    row.param = f[c[0]];
    row.value = to_double(f[c[1]], path);
    row.scheme = f[c[2]];
    row.status = f[c[3]];
    if (row.status == "ok") {
      row.ee = to_double(f[c[4]], path);
      row.iterations = to_index(f[c[5]], path);
      row.throughput = to_double(f[c[6]], path);
      row.uav_energy = to_double(f[c[7]], path);
      row.ce_energy = to_double(f[c[8]], path);
    }
    row.message = f[c[9]];
    rows.push_back(std::move(row));
  }
  return rows;
}

FlyTables read_fly_artifacts(const fs::path& dir, const Scenario& s) {
  const std::size_t N = s.num_slots();
  FlyTables out;
  out.schedule = Schedule(s);
  out.power = PowerProfile::Zero(static_cast<Eigen::Index>(s.num_ces()), static_cast<Eigen::Index>(N));
  out.trajectory = Trajectory::Zero(2, static_cast<Eigen::Index>(N + 1));

  const fs::path tp = dir / "trajectory.csv";
  const auto traj = read_csv(tp);
  const auto tc = columns(traj, tp, {"slot", "x", "y"});
  if (traj.size() != N + 2) throw ConfigError("trajectory table has the wrong number of rows");
  for (std::size_t r = 1; r < traj.size(); ++r) {
    const auto n = static_cast<Eigen::Index>(to_index(traj[r][tc[0]], tp));
    if (n > static_cast<Eigen::Index>(N)) throw ConfigError("slot out of range in " + tp.string());
    out.trajectory(0, n) = to_double(traj[r][tc[1]], tp);
    out.trajectory(1, n) = to_double(traj[r][tc[2]], tp);
  }

  const fs::path sp = dir / "schedule.csv";
  const auto sched = read_csv(sp);
  const auto sc = columns(sched, sp, {"index", "bd"});
  for (std::size_t r = 1; r < sched.size(); ++r) {
    const std::size_t n = to_index(sched[r][sc[0]], sp), k = to_index(sched[r][sc[1]], sp);
    if (n >= N || k >= s.num_bds()) throw ConfigError("schedule entry out of range in " + sp.string());
    out.schedule.of(s, k, n) = 1;
  }

  const fs::path pp = dir / "power.csv";
  const auto pow = read_csv(pp);
  const auto pc = columns(pow, pp, {"index", "ce", "power"});
  for (std::size_t r = 1; r < pow.size(); ++r) {
    const std::size_t n = to_index(pow[r][pc[0]], pp), m = to_index(pow[r][pc[1]], pp);
    if (n >= N || m >= s.num_ces()) throw ConfigError("power entry out of range in " + pp.string());
    out.power(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = to_double(pow[r][pc[2]], pp);
  }
  return out;
}

HoverPlan read_hover_plan(const fs::path& dir, const Scenario& s) {
  const fs::path path = dir / "hover_plan.csv";
  const auto table = read_csv(path);
  const auto c = columns(table, path, {"stop", "bd", "x", "y", "hover_time", "power"});
  const std::size_t K = s.num_bds();
  if (table.size() != K + 1) throw ConfigError("hover plan has the wrong number of rows");
  HoverPlan plan;
  plan.order.assign(K, 0);
  plan.positions.resize(2, static_cast<Eigen::Index>(K + 1));
  plan.times.resize(static_cast<Eigen::Index>(K));
  plan.powers.resize(static_cast<Eigen::Index>(K));
  for (std::size_t r = 1; r <= K; ++r) {
    const std::size_t i = to_index(table[r][c[0]], path);
    if (i >= K) throw ConfigError("stop out of range in " + path.string());
    const auto ii = static_cast<Eigen::Index>(i);
    plan.order[i] = to_index(table[r][c[1]], path);
    plan.positions(0, ii + 1) = to_double(table[r][c[2]], path);
    plan.positions(1, ii + 1) = to_double(table[r][c[3]], path);
    plan.times(ii) = to_double(table[r][c[4]], path);
    plan.powers(ii) = to_double(table[r][c[5]], path);
  }
  plan.positions.col(0) = plan.positions.col(static_cast<Eigen::Index>(K));
  refresh_legs(plan);
  return plan;
}

}  // namespace ubcn::io
