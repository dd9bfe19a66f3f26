#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "acomid/experiment.hpp"

namespace acomid {

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raw flag values; turned into an ExperimentSpec once parsing is done.
struct SpecFlags {
  std::string algo = "l2trick";
  std::size_t workers = 1;
  long long tau_max = -1;  // -1: workers - 1
  std::string delay = "fixed";
  std::string trace;
  double eta = 0.01;
  double lambda = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double alpha = 0.1;
  double beta = 1.0;
  std::size_t epochs = 1;
  std::uint64_t seed = 1;
  std::string data;
  std::string synthetic;
  std::string labels = "planted";
  double noise = 0.0;
  std::size_t dim = 0;
  std::string mode = "sim";
  std::uint64_t eval_every = 0;
  std::string out;
  std::string trace_out;
  std::string cache_dir = ".acomid-cache";
  bool init_w1_ones = false;
  bool regret = false;
  bool wall_clock = false;
};

void add_spec_options(CLI::App* app, SpecFlags& f) {
  app->add_option("--algo", f.algo, "dsgd | comid | comid-closed | l2trick | ftrl | aftrl")
      ->capture_default_str();
  app->add_option("--workers", f.workers, "number of workers")->capture_default_str();
  app->add_option("--tau-max", f.tau_max, "staleness bound (default: workers - 1)");
  app->add_option("--delay", f.delay, "fixed | random")->capture_default_str();
  app->add_option("--trace", f.trace, "replay a delay trace file (overrides --delay)");
  app->add_option("--eta", f.eta, "step size")->capture_default_str();
  app->add_option("--lambda", f.lambda, "L2 coefficient (dsgd, comid, l2trick)")
      ->capture_default_str();
  app->add_option("--lambda1", f.lambda1, "L1 coefficient (comid, ftrl)")->capture_default_str();
  app->add_option("--lambda2", f.lambda2, "L2 coefficient (ftrl)")->capture_default_str();
  app->add_option("--alpha", f.alpha, "FTRL alpha")->capture_default_str();
  app->add_option("--beta", f.beta, "FTRL beta")->capture_default_str();
  app->add_option("--epochs", f.epochs, "passes over the data")->capture_default_str();
  app->add_option("--seed", f.seed, "shuffle / synthetic-data seed")->capture_default_str();
  app->add_option("--data", f.data, "libsvm file (.gz accepted)");
  app->add_option("--synthetic", f.synthetic, "synthetic profile dim,n,lo,hi");
  app->add_option("--labels", f.labels, "synthetic labels: planted | random")
      ->capture_default_str();
  app->add_option("--noise", f.noise, "label noise sd for planted labels");
  app->add_option("--dim", f.dim, "dimension override for --data");
  app->add_option("--mode", f.mode, "sim | threaded")->capture_default_str();
  app->add_option("--eval-every", f.eval_every, "steps between evaluations (0: one epoch)");
  app->add_option("--trace-out", f.trace_out, "write the realized delay trace here");
  app->add_option("--cache-dir", f.cache_dir, "w* cache directory")->capture_default_str();
  app->add_flag("--init-z-for-w1-ones", f.init_w1_ones, "FTRL: start from w = (1, ..., 1)");
  app->add_flag("--regret", f.regret, "track regret against the L2-regularized optimum");
  app->add_flag("--wall-clock", f.wall_clock, "record wall time in simulated mode");
}

std::vector<std::size_t> parse_list(const std::string& s, std::size_t expected, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": bad number '" + tok + "'");
    }
  }
  if (out.size() != expected) {
    throw UsageError(std::string(what) + ": expected " + std::to_string(expected) + " values");
  }
  return out;
}

ExperimentSpec to_spec(const SpecFlags& f) {
  ExperimentSpec spec;
  auto& sim = spec.sim;
  const auto algo = parse_algo(f.algo);
  if (!algo) throw UsageError("unknown --algo '" + f.algo + "'");
  sim.algo = *algo;
  if (f.workers < 1) throw UsageError("--workers must be >= 1");
  sim.workers = f.workers;
  sim.eta = f.eta;
  sim.lambda = f.lambda;
  sim.lambda1 = f.lambda1;
  sim.lambda2 = f.lambda2;
  sim.alpha = f.alpha;
  sim.beta = f.beta;
  sim.epochs = f.epochs;
  sim.seed = f.seed;
  sim.eval_every = f.eval_every;
  sim.init_w1_ones = f.init_w1_ones;
  const std::uint64_t tau = f.tau_max >= 0 ? static_cast<std::uint64_t>(f.tau_max) : f.workers - 1;
  if (!f.trace.empty()) {
    sim.delay = read_delay_trace(f.trace);
  } else if (f.delay == "fixed") {
    sim.delay = DelaySchedule::fixed(tau);
  } else if (f.delay == "random") {
    sim.delay = DelaySchedule::random_bounded(tau, f.seed);
  } else {
    throw UsageError("unknown --delay '" + f.delay + "'");
  }
  if (f.mode == "sim") {
    spec.mode = RunMode::simulated;
  } else if (f.mode == "threaded") {
    spec.mode = RunMode::threaded;
  } else {
    throw UsageError("unknown --mode '" + f.mode + "'");
  }
  if (!f.data.empty() && !f.synthetic.empty()) {
    throw UsageError("--data and --synthetic are mutually exclusive");
  }
  if (!f.data.empty()) {
    spec.data_path = f.data;
    if (f.dim > 0) spec.dim_override = f.dim;
  } else if (!f.synthetic.empty()) {
    const auto v = parse_list(f.synthetic, 4, "--synthetic");
    SyntheticProfile p;
    p.dim = v[0];
    p.n_samples = v[1];
    p.nnz_lo = v[2];
    p.nnz_hi = v[3];
    p.seed = f.seed;
    if (f.labels == "planted") {
      p.planted_w = make_planted_w(p.dim, f.seed + 1);
      p.noise_sd = f.noise;
    } else if (f.labels != "random") {
      throw UsageError("unknown --labels '" + f.labels + "'");
    }
    spec.synthetic = std::move(p);
  } else {
    throw UsageError("one of --data or --synthetic is required");
  }
  if (!f.out.empty()) spec.out = f.out;
  if (!f.trace_out.empty()) spec.trace_out = f.trace_out;
  spec.cache_dir = f.cache_dir;
  spec.regret = f.regret;
  spec.wall_clock = f.wall_clock;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return spec;
}

std::string trim(std::string_view v) {
  const auto b = v.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = v.find_last_not_of(" \t\r");
  return std::string(v.substr(b, e - b + 1));
}

// Replaces `--config FILE` with the `key = value` lines of FILE turned into
// flags. Keys also given explicitly on the command line are skipped, so the
// flag overrides the file.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  static const std::set<std::string> kSwitches = {"regret", "wall-clock", "init-z-for-w1-ones"};
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    std::size_t span = 0;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[i + 1];
      span = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      span = 1;
    } else {
      continue;
    }
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::set<std::string> explicit_keys;
    for (std::size_t j = 0; j < args.size(); ++j) {
      if (j >= i && j < i + span) continue;
      const auto& a = args[j];
      if (a.rfind("--", 0) == 0) explicit_keys.insert(a.substr(2, a.find('=') - 2));
    }
    std::vector<std::string> extra;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string body = trim(line.substr(0, line.find_first_of("#;")));
      if (body.empty() || body.front() == '[') continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) {
        throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
      }
      std::string key = trim(std::string_view(body).substr(0, eq));
      std::string val = trim(std::string_view(body).substr(eq + 1));
      if (key.rfind("--", 0) == 0) key = key.substr(2);
      if (val.size() >= 2 && (val.front() == '"' || val.front() == '\'') && val.back() == val.front()) {
        val = val.substr(1, val.size() - 2);
      }
      if (explicit_keys.count(key) != 0) continue;
      if (kSwitches.count(key) != 0) {
        if (val == "true" || val == "1" || val == "yes") extra.push_back("--" + key);
        continue;
      }
      extra.push_back("--" + key);
      extra.push_back(val);
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
               args.begin() + static_cast<std::ptrdiff_t>(i + span));
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(i), extra.begin(), extra.end());
    i += extra.size();
    if (i > 0) --i;
  }
  return args;
}

// `key=value` overrides used by `compare --a/--b`.
void apply_override(SpecFlags& f, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw UsageError("override '" + kv + "' is not key=value");
  const std::string key = kv.substr(0, eq);
  const std::string val = kv.substr(eq + 1);
  auto num = [&](auto& field) {
    std::stringstream ss(val);
    ss >> field;
    if (!ss || !ss.eof()) throw UsageError("bad value for " + key + ": '" + val + "'");
  };
  const std::map<std::string, std::function<void()>> setters = {
      {"algo", [&] { f.algo = val; }},
      {"workers", [&] { num(f.workers); }},
      {"tau-max", [&] { num(f.tau_max); }},
      {"delay", [&] { f.delay = val; }},
      {"trace", [&] { f.trace = val; }},
      {"eta", [&] { num(f.eta); }},
      {"lambda", [&] { num(f.lambda); }},
      {"lambda1", [&] { num(f.lambda1); }},
      {"lambda2", [&] { num(f.lambda2); }},
      {"alpha", [&] { num(f.alpha); }},
      {"beta", [&] { num(f.beta); }},
      {"epochs", [&] { num(f.epochs); }},
      {"seed", [&] { num(f.seed); }},
      {"data", [&] { f.data = val; }},
      {"synthetic", [&] { f.synthetic = val; }},
      {"labels", [&] { f.labels = val; }},
      {"mode", [&] { f.mode = val; }},
      {"eval-every", [&] { num(f.eval_every); }},
      {"init-z-for-w1-ones", [&] { f.init_w1_ones = val == "true" || val == "1"; }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw UsageError("unknown override key '" + key + "'");
  it->second();
}

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int cmd_run(const SpecFlags& flags) {
  const ExperimentSpec spec = to_spec(flags);
  const Dataset data = load_dataset(spec);
  const RunResult res = run_experiment(spec, data);
  if (spec.out) {
    std::ofstream out(*spec.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + spec.out->string());
    write_csv(out, res.records, data.size());
  } else {
    write_csv(std::cout, res.records, data.size());
  }
  return 0;
}

int cmd_compare(const SpecFlags& base, const std::vector<std::string>& over_a,
                const std::vector<std::string>& over_b) {
  SpecFlags fa = base, fb = base;
  for (const auto& kv : over_a) apply_override(fa, kv);
  for (const auto& kv : over_b) apply_override(fb, kv);
  ExperimentSpec a = to_spec(fa), b = to_spec(fb);
  a.out.reset();
  b.out.reset();
  CompareReport rep;
  try {
    rep = compare_runs(a, b);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  auto emit = [&](std::ostream& out) {
    out << "step,logloss_a,logloss_b,gap\n";
    for (const auto& r : rep.rows) {
      out << r.step << ',' << fmt_real(r.logloss_a) << ',' << fmt_real(r.logloss_b) << ','
          << fmt_real(r.logloss_b - r.logloss_a) << '\n';
    }
  };
  if (!base.out.empty()) {
    std::ofstream out(base.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + base.out);
    emit(out);
  } else {
    emit(std::cout);
  }
  std::cout << "final_linf=" << fmt_real(rep.final_linf) << '\n'
            << "tx_a=" << rep.tx_a << '\n'
            << "tx_b=" << rep.tx_b << '\n'
            << "tx_ratio_a_over_b="
            << fmt_real(rep.tx_b > 0 ? static_cast<double>(rep.tx_a) / rep.tx_b : 0.0) << '\n';
  return 0;
}

int cmd_verify(const VerifyOptions& opts) {
  const auto checks = run_verify_suite(opts);
  bool ok = true;
  std::cout << "check,status,detail\n";
  for (const auto& c : checks) {
    std::cout << c.name << ',' << (c.pass ? "pass" : "fail") << ',' << c.detail << '\n';
    ok = ok && c.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Delayed-gradient optimizers on a simulated parameter server"};
  app.require_subcommand(1);

  SpecFlags run_flags;
  auto* run = app.add_subcommand("run", "run one experiment and write a CSV curve");
  std::string config_file;  // expanded before parsing; listed for --help
  run->add_option("--config", config_file, "key = value file; explicit flags win");
  add_spec_options(run, run_flags);
  run->add_option("--out", run_flags.out, "output CSV (default stdout)");

  SpecFlags cmp_flags;
  std::vector<std::string> over_a, over_b;
  auto* compare = app.add_subcommand("compare", "run two variants on the same data");
  compare->add_option("--config", config_file, "key = value file; explicit flags win");
  add_spec_options(compare, cmp_flags);
  compare->add_option("--out", cmp_flags.out, "gap CSV (default stdout)");
  compare->add_option("--a", over_a, "key=value override for run A");
  compare->add_option("--b", over_b, "key=value override for run B");

  VerifyOptions vopts;
  auto* verify = app.add_subcommand("verify", "run the property checks");
  verify->add_option("--inject-ftrl-perturbation", vopts.ftrl_perturbation,
                     "add this to the FTRL accumulator (mutation test)");
  verify->add_option("--seed", vopts.seed, "seed for the randomized checks");

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::vector<char*> cargs;
  for (auto& a : args) cargs.push_back(a.data());

  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*compare) return cmd_compare(cmp_flags, over_a, over_b);
    if (*verify) return cmd_verify(vopts);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace acomid
