#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "fraflow/chain_rule.hpp"
#include "fraflow/gronwall.hpp"
#include "fraflow/sonine.hpp"
#include "fraflow/trajectory_io.hpp"

namespace fraflow::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// json has no inf/nan
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string csv_cell(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return s;
}

unsigned worker_count(unsigned jobs, std::size_t tasks) {
  unsigned n = jobs > 0 ? jobs : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(tasks, 1)));
}

template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn fn) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  const unsigned n = worker_count(jobs, count);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
}

json certificate_bundle(const std::vector<Certificate>& certs) {
  int pass = 0, fail = 0, reject = 0;
  json list = json::array();
  for (const Certificate& c : certs) {
    pass += c.outcome == Outcome::pass;
    fail += c.outcome == Outcome::fail;
    reject += c.outcome == Outcome::reject;
    list.push_back(to_json(c));
  }
  return {{"summary", {{"total", certs.size()}, {"pass", pass}, {"fail", fail}, {"reject", reject}}},
          {"certificates", list}};
}

std::vector<Certificate> trajectory_certificates(const Trajectory& tr, const SoninePair& pair) {
  std::vector<Certificate> out;
  out.push_back(check_chain_rule(tr, pair).certificate());
  out.push_back(check_ab_inequality(tr, pair).certificate());
  out.push_back(continuity_modulus(tr, pair).certificate());
  return out;
}

json blowup_json(const FlowResult& r) {
  if (!r.blow_up) return nullptr;
  const BlowUpReport& b = *r.blow_up;
  json growth = json::array();
  for (double g : b.growth_history) growth.push_back(number(g));
  return {{"t_star", b.time_estimate},
          {"uncertainty", b.time_uncertainty},
          {"last_node", b.last_node},
          {"trigger", b.trigger},
          {"growth_history", growth}};
}

json regime_json(const RegimeReport& r) {
  return {{"p", r.p},
          {"q", r.q},
          {"d", r.d},
          {"p_star", number(r.p_star)},
          {"two_star", number(r.two_star)},
          {"r_cz", number(r.r_cz)},
          {"theta_needed", r.theta_needed},
          {"theta", number(r.theta)},
          {"verdict", to_string(r.verdict)},
          {"condition", r.condition}};
}

int status_exit(Termination t) {
  switch (t) {
    case Termination::completed:
      return exit_ok;
    case Termination::blew_up:
      return exit_blowup;
    default:
      return exit_failure;
  }
}

}  // namespace

int cmd_solve(const RunConfig& cfg) {
  FlowResult flow;
  SoninePair pair = rl_pair(0.5);
  json diag;
  if (cfg.problem_type == "plaplace") {
    ExperimentResult res = run_experiment(cfg.pde, cfg.solver);
    pair = build_problem(cfg.pde).pair;
    diag["sup_phi1"] = number(res.sup_energy);
    diag["E_T"] = number(res.energy_bound);
    diag["energy_ratio"] = number(res.energy_ratio);
    diag["regime"] = regime_json(res.regime);
    flow = std::move(res.flow);
  } else {
    const FlowProblem problem = build_abstract_problem(cfg);
    pair = problem.pair;
    flow = solve_dc_flow(problem, cfg.solver);
    double sup = 0.0;
    for (const auto& d : flow.trajectory.diagnostics) sup = std::max(sup, d.energy);
    const double budget = energy_budget(problem);
    diag["sup_phi1"] = number(sup);
    diag["E_T"] = number(budget);
    diag["energy_ratio"] = budget > 0.0 ? number(sup / budget) : json(nullptr);
  }
  const Trajectory& tr = flow.trajectory;
  diag["status"] = to_string(flow.status);
  diag["message"] = flow.message;
  diag["steps"] = tr.grid.steps();
  diag["tau"] = tr.grid.tau();
  diag["accepted_nodes"] = tr.accepted();
  diag["blow_up"] = blowup_json(flow);
  diag["t_star"] = flow.blow_up ? json(flow.blow_up->time_estimate) : json(nullptr);

  prepare_out(cfg.out);
  const fs::path out(cfg.out);
  write_trajectory_csv((out / "trajectory.csv").string(), tr);
  write_dump((out / "trajectory.bin").string(), tr);
  write_json(out / "diagnostics.json", diag);
  write_json(out / "certificate.json", certificate_bundle(trajectory_certificates(tr, pair)));

  std::cout << to_string(flow.status);
  if (flow.blow_up) std::cout << " t*=" << format_double(flow.blow_up->time_estimate);
  std::cout << '\n';
  if (flow.status == Termination::inner_nonconvergence) std::cerr << "fraflow: " << flow.message << '\n';
  return status_exit(flow.status);
}

// ---- sweep

namespace {

struct SweepTuple {
  double p, q, alpha;
  int points;
  std::size_t steps;
  double amplitude;
};

const char* kSweepHeader = "p,q,alpha,m,N,amplitude,verdict,t_star,sup_phi1,E_T,C_emp,regime,error";
constexpr std::size_t kSweepColumns = 13;

std::vector<SweepTuple> sweep_tuples(const RunConfig& cfg) {
  const SweepSpec& s = cfg.sweep;
  const PdeExperiment& b = cfg.pde;
  auto or_base = [](const auto& axis, auto base) {
    using T = decltype(base);
    return axis.empty() ? std::vector<T>{base} : std::vector<T>(axis.begin(), axis.end());
  };
  std::vector<SweepTuple> out;
  for (double p : or_base(s.p, b.p))
    for (double q : or_base(s.q, b.q))
      for (double a : or_base(s.alpha, b.alpha))
        for (int m : or_base(s.points, b.grid.points))
          for (std::size_t n : or_base(s.steps, b.steps))
            for (double amp : or_base(s.amplitude, b.initial.amplitude)) out.push_back({p, q, a, m, n, amp});
  return out;
}

PdeExperiment tuple_experiment(const RunConfig& cfg, const SweepTuple& t) {
  PdeExperiment e = cfg.pde;
  e.p = t.p;
  e.q = t.q;
  e.alpha = t.alpha;
  e.grid = Grid(cfg.pde.grid.dim, t.points);
  e.steps = t.steps;
  e.initial.amplitude = t.amplitude;
  return e;
}

std::string tuple_prefix(const SweepTuple& t) {
  return format_double(t.p) + ',' + format_double(t.q) + ',' + format_double(t.alpha) + ',' +
         std::to_string(t.points) + ',' + std::to_string(t.steps) + ',' + format_double(t.amplitude);
}

std::string sweep_row(const RunConfig& cfg, const SweepTuple& t) {
  std::string row = tuple_prefix(t) + ',';
  try {
    const PdeExperiment e = tuple_experiment(cfg, t);
    const ExperimentResult r = run_experiment(e, cfg.solver);
    const bool done = r.status == Termination::completed;
    row += to_string(r.status) + ',';
    row += (r.status == Termination::blew_up ? format_double(r.blowup_time) : "") + ',';
    row += format_double(r.sup_energy) + ',' + format_double(r.energy_bound) + ',';
    row += (done ? format_double(r.energy_ratio) : "") + ',';
    row += to_string(r.regime.verdict) + ',';
    row += done ? "" : csv_cell(r.flow.message);
  } catch (const std::exception& ex) {
    row += "error,,,,,," + csv_cell(ex.what());
  }
  return row;
}

std::size_t count_cells(const std::string& row) { return static_cast<std::size_t>(std::count(row.begin(), row.end(), ',')) + 1; }

std::string fingerprint(const RunConfig& cfg, std::size_t tuples) {
  json key = json::object();
  for (const char* k : {"problem", "kernel", "time", "solver", "sweep"})
    if (cfg.source.is_object() && cfg.source.contains(k)) key[k] = cfg.source.at(k);
  key["tuples"] = tuples;
  const std::string text = key.dump();
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// rows already on disk from an earlier, possibly interrupted, run of the same sweep
std::map<std::size_t, std::string> replay_ledger(const fs::path& path, const std::string& fp, std::size_t tuples) {
  std::map<std::size_t, std::string> done;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  if (!in || !std::getline(in, line) || line != "fingerprint," + fp) return done;
  while (std::getline(in, line)) {
    if (in.eof()) break;  // last line without newline: write was cut short
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    std::size_t idx = 0;
    try {
      idx = std::stoul(line.substr(0, comma));
    } catch (const std::exception&) {
      continue;
    }
    std::string row = line.substr(comma + 1);
    if (idx < tuples && count_cells(row) == kSweepColumns) done[idx] = std::move(row);
  }
  return done;
}

struct ParsedRow {
  SweepTuple t;
  std::string verdict;
};

void write_frontier(const fs::path& path, const std::vector<SweepTuple>& tuples, const std::vector<std::string>& rows) {
  // group by everything except the amplitude, in first-appearance order
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, std::string>>> groups;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const SweepTuple& t = tuples[i];
    const std::string key = format_double(t.p) + ',' + format_double(t.q) + ',' + format_double(t.alpha) + ',' +
                            std::to_string(t.points) + ',' + std::to_string(t.steps);
    std::stringstream ss(rows[i]);
    std::string cell;
    for (int c = 0; c <= 6; ++c) std::getline(ss, cell, ',');
    if (!groups.count(key)) order.push_back(key);
    groups[key].emplace_back(t.amplitude, cell);
  }
  std::ostringstream os;
  os << "p,q,alpha,m,N,last_completed,first_blowup,monotone\n";
  for (const std::string& key : order) {
    auto runs = groups[key];
    std::stable_sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double last_ok = NAN, first_blow = NAN;
    bool monotone = true, seen_blow = false;
    for (const auto& [amp, verdict] : runs) {
      if (verdict == "blew_up") {
        if (!seen_blow) first_blow = amp;
        seen_blow = true;
      } else if (verdict == "completed") {
        if (seen_blow) monotone = false;
        else last_ok = amp;
      }
    }
    os << key << ',' << (std::isnan(last_ok) ? "" : format_double(last_ok)) << ','
       << (std::isnan(first_blow) ? "" : format_double(first_blow)) << ',' << (monotone ? "true" : "false") << '\n';
  }
  write_text(path, os.str());
}

void write_brackets(const fs::path& path, const RunConfig& cfg, unsigned jobs) {
  const auto& b = cfg.sweep.bisect;
  const std::vector<double> alphas = b.alpha.empty() ? std::vector<double>{cfg.pde.alpha} : b.alpha;
  std::vector<std::string> rows(alphas.size());
  parallel_for(alphas.size(), jobs, [&](std::size_t i) {
    PdeExperiment e = cfg.pde;
    e.alpha = alphas[i];
    std::string row = format_double(e.p) + ',' + format_double(e.q) + ',' + format_double(e.alpha) + ',' +
                      std::to_string(e.grid.points) + ',' + std::to_string(e.steps) + ',';
    try {
      const BisectionResult r = amplitude_bisection(e, b.a_lo, b.a_hi, cfg.solver, b.budget, b.ratio);
      std::string c_emp;
      if (r.ok) {
        e.initial.amplitude = r.lower;
        const ExperimentResult lo = run_experiment(e, cfg.solver);
        c_emp = format_double(lo.energy_ratio);
      }
      row += std::string(r.ok ? "true" : "false") + ',' + (r.ok ? format_double(r.lower) : "") + ',' +
             (r.ok ? format_double(r.upper) : "") + ',' + (r.ok ? format_double(r.upper / r.lower) : "") + ',' +
             std::to_string(r.runs) + ',' + c_emp + ',' + csv_cell(r.message);
    } catch (const std::exception& ex) {
      row += "false,,,,0,," + csv_cell(ex.what());
    }
    rows[i] = row;
  });
  std::string text = "p,q,alpha,m,N,ok,A_minus,A_plus,ratio,runs,C_emp,message\n";
  for (const auto& r : rows) text += r + '\n';
  write_text(path, text);
}

}  // namespace

int cmd_sweep(const RunConfig& cfg, unsigned jobs) {
  if (cfg.problem_type != "plaplace") throw ConfigError("sweep needs problem.type = plaplace");
  const std::vector<SweepTuple> tuples = sweep_tuples(cfg);
  prepare_out(cfg.out);
  const fs::path out(cfg.out);
  const fs::path ledger_path = out / "sweep.ledger";
  const std::string fp = fingerprint(cfg, tuples.size());

  std::map<std::size_t, std::string> done = replay_ledger(ledger_path, fp, tuples.size());
  {
    std::ofstream ledger(ledger_path, std::ios::binary | std::ios::trunc);
    if (!ledger) throw std::runtime_error("cannot write " + ledger_path.string());
    ledger << "fingerprint," << fp << '\n';
    for (const auto& [i, row] : done) ledger << i << ',' << row << '\n';
  }
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < tuples.size(); ++i)
    if (!done.count(i)) pending.push_back(i);

  std::vector<std::string> rows(tuples.size());
  for (const auto& [i, row] : done) rows[i] = row;
  std::ofstream ledger(ledger_path, std::ios::binary | std::ios::app);
  std::mutex mu;
  parallel_for(pending.size(), jobs, [&](std::size_t k) {
    const std::size_t i = pending[k];
    std::string row = sweep_row(cfg, tuples[i]);
    std::lock_guard<std::mutex> lock(mu);
    ledger << i << ',' << row << '\n' << std::flush;
    rows[i] = std::move(row);
  });
  ledger.close();

  std::string csv = std::string(kSweepHeader) + '\n';
  for (const auto& r : rows) csv += r + '\n';
  write_text(out / "sweep.csv", csv);
  write_frontier(out / "frontier.csv", tuples, rows);
  if (cfg.sweep.bisect.enabled) write_brackets(out / "brackets.csv", cfg, jobs);

  std::cout << tuples.size() << " rows (" << done.size() << " replayed from ledger)\n";
  return exit_ok;
}

// ---- certify

int cmd_certify(const RunConfig& cfg) {
  if (cfg.certify.dump.empty() && !cfg.certify.gronwall)
    throw ConfigError("certify needs certify.dump or certify.gronwall = true");
  std::vector<Certificate> certs;
  json extra = json::object();
  if (!cfg.certify.dump.empty()) {
    Trajectory tr;
    try {
      tr = read_dump(cfg.certify.dump);
    } catch (const std::exception& e) {
      std::cerr << "fraflow: cannot read dump: " << e.what() << '\n';
      return exit_no_input;
    }
    std::optional<SoninePair> pair;
    try {
      pair = pair_from_tag(tr.kernel);
    } catch (const std::exception& e) {
      Certificate c;
      c.lemma = "trajectory";
      c.outcome = Outcome::reject;
      c.diagnostic = std::string("kernel cannot be rebuilt from the dump: ") + e.what();
      certs.push_back(c);
    }
    if (pair) {
      const auto tc = trajectory_certificates(tr, *pair);
      certs.insert(certs.end(), tc.begin(), tc.end());
    }
    extra["dump"] = {{"path", cfg.certify.dump}, {"accepted_nodes", tr.accepted()}, {"steps", tr.grid.steps()}};
  }
  if (cfg.certify.gronwall) {
    const GronwallSuiteResult s = run_gronwall_suite(cfg.seed, cfg.certify.per_lemma);
    certs.insert(certs.end(), s.certificates.begin(), s.certificates.end());
    const auto violations = gronwall_violation_certificates();
    int rejected = 0;
    for (const Certificate& c : violations) rejected += c.outcome == Outcome::reject;
    // handcrafted violations must be rejected; a pass or fail there is a checker bug
    Certificate v;
    v.lemma = "gronwall_violation_suite";
    v.outcome = rejected == static_cast<int>(violations.size()) ? Outcome::pass : Outcome::fail;
    v.diagnostic = std::to_string(rejected) + "/" + std::to_string(violations.size()) + " rejected";
    json listed = json::array();
    for (const Certificate& c : violations) listed.push_back(to_json(c));
    v.witnesses = {{"instances", listed}};
    certs.push_back(v);
    extra["gronwall"] = {{"seed", cfg.seed},
                         {"per_lemma", cfg.certify.per_lemma},
                         {"linear_pass", s.linear_pass},
                         {"local_pass", s.local_pass},
                         {"small_pass", s.small_pass},
                         {"total", s.total},
                         {"violations_rejected", rejected},
                         {"violations_total", violations.size()}};
  }
  json bundle = certificate_bundle(certs);
  bundle["inputs"] = extra;
  prepare_out(cfg.out);
  write_json(fs::path(cfg.out) / "certificates.json", bundle);
  const int failed = bundle["summary"]["fail"].get<int>();
  std::cout << bundle["summary"].dump() << '\n';
  return failed > 0 ? exit_failure : exit_ok;
}

// ---- kernels

int cmd_kernels(const RunConfig& cfg) {
  const KernelsSpec& ks = cfg.kernels;
  bool ok = true;
  json report = json::object();

  std::string sonine = "alpha,N_coarse,N_fine,window_start,coarse_error,fine_error,all_nodes_error,order,passed\n";
  json sj = json::array();
  for (double a : ks.alpha)
    for (std::size_t n : ks.steps) {
      const SonineCertificate c = verify_sonine(rl_pair(a), TimeGrid(1.0, n), ks.tolerance);
      const bool pass = c.passed && c.observed_order >= 0.5;
      ok = ok && pass;
      sonine += format_double(a) + ',' + std::to_string(c.coarse_steps) + ',' + std::to_string(c.fine_steps) + ',' +
                format_double(c.window_start) + ',' + format_double(c.coarse_error) + ',' +
                format_double(c.max_error) + ',' + format_double(c.all_nodes_error) + ',' +
                format_double(c.observed_order) + ',' + (pass ? "true" : "false") + '\n';
      sj.push_back({{"alpha", a},
                    {"coarse_steps", c.coarse_steps},
                    {"fine_steps", c.fine_steps},
                    {"coarse_error", c.coarse_error},
                    {"fine_error", c.max_error},
                    {"order", number(c.observed_order)},
                    {"passed", pass}});
    }
  report["sonine"] = sj;

  // s_n for ell = 1 is exp(-n t)
  const TimeGrid g1024(1.0, 1024);
  const RegularizedKernel ex = regularized_kernel(constant_kernel(1.0), 2.0, g1024);
  double exp_err = 0.0;
  for (std::size_t j = 0; j < g1024.nodes(); ++j)
    exp_err = std::max(exp_err, std::abs(ex.s(static_cast<Eigen::Index>(j)) - std::exp(-2.0 * g1024.time(j))));
  const bool exp_ok = exp_err <= 5e-3;
  ok = ok && exp_ok;
  report["exponential"] = {{"n", 2.0}, {"steps", 1024}, {"sup_error", exp_err}, {"passed", exp_ok}};

  std::string reg = "alpha,n,N,l1_distance,decreasing\n";
  json rj = json::array();
  const SoninePair half = rl_pair(0.5);
  double prev = INFINITY;
  for (int n : ks.regularized) {
    const RegularizedKernel r = regularized_kernel(half.ell, n, g1024);
    const double d = l1_distance(r, half.k);
    const bool dec = d < prev;
    ok = ok && dec;
    prev = d;
    reg += "0.5," + std::to_string(n) + ",1024," + format_double(d) + ',' + (dec ? "true" : "false") + '\n';
    rj.push_back({{"n", n}, {"l1_distance", d}, {"decreasing", dec}});
  }
  report["regularized"] = rj;
  report["passed"] = ok;

  prepare_out(cfg.out);
  const fs::path out(cfg.out);
  write_text(out / "kernels.csv", sonine);
  write_text(out / "regularized.csv", reg);
  write_json(out / "kernels.json", report);
  std::cout << (ok ? "all kernel checks passed" : "kernel checks FAILED") << '\n';
  return ok ? exit_ok : exit_failure;
}

}  // namespace fraflow::cli
