#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "acomid/experiment.hpp"
#include "acomid/metrics.hpp"

namespace acomid {

namespace {

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (data_path.has_value() == synthetic.has_value()) {
    throw std::invalid_argument("exactly one of --data and --synthetic is required");
  }
  sim.validate();
}

std::string ExperimentSpec::data_key() const {
  if (data_path) {
    return "file:" + data_path->string() +
           (dim_override ? "#" + std::to_string(*dim_override) : std::string());
  }
  const auto& p = *synthetic;
  return "synthetic:" + std::to_string(p.dim) + "," + std::to_string(p.n_samples) + "," +
         std::to_string(p.nnz_lo) + "," + std::to_string(p.nnz_hi) + "," +
         std::to_string(p.seed) + (p.planted_w ? ",planted" : ",random") + "," +
         fmt_real(p.noise_sd);
}

Dataset load_dataset(const ExperimentSpec& spec) {
  if (spec.data_path) return read_libsvm(*spec.data_path, spec.dim_override);
  if (spec.synthetic) return gen_synthetic(*spec.synthetic);
  throw std::invalid_argument("no data source");
}

RunResult run_experiment(const ExperimentSpec& spec, const Dataset& data) {
  spec.validate();
  if (spec.sim.epochs > 0 && data.empty()) throw std::invalid_argument("dataset is empty");
  RunOptions opts;
  opts.wall_clock = spec.wall_clock || spec.mode == RunMode::threaded;
  if (spec.regret) {
    const Regularizer reg = sim_regularizer(spec.sim);
    if (reg.lambda1() > 0.0) {
      throw std::invalid_argument("--regret needs an L2-only regularizer to solve for w*");
    }
    WStarOptions wopts;
    opts.regret_w_star = solve_w_star_cached(data, reg, wopts, spec.cache_dir).w;
  }
  if (spec.sim.epochs == 0) {
    RunResult empty;
    empty.final_w.assign(data.dim, 0.0);
    return empty;
  }
  RunResult res = spec.mode == RunMode::threaded ? run_threaded(spec.sim, data, opts)
                                                 : run_simulated(spec.sim, data, opts);
  if (spec.trace_out) write_delay_trace(*spec.trace_out, res.taus, res.tau_cap);
  return res;
}

void write_csv(std::ostream& out, const std::vector<RunRecord>& records, std::size_t n_samples) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    const double epoch =
        n_samples > 0 ? static_cast<double>(r.step) / static_cast<double>(n_samples) : 0.0;
    char epoch_buf[32];
    std::snprintf(epoch_buf, sizeof(epoch_buf), "%.10g", epoch);
    out << r.step << ',' << epoch_buf << ',' << fmt_real(r.logloss_sum) << ','
        << fmt_real(r.logloss_mean) << ',' << (r.regret ? fmt_real(*r.regret) : std::string())
        << ',' << r.tx_values << ',' << fmt_real(r.wall_ms) << '\n';
  }
}

CompareReport compare_runs(const ExperimentSpec& a, const ExperimentSpec& b) {
  if (a.data_key() != b.data_key()) {
    throw std::invalid_argument("compare: mismatched data sources (" + a.data_key() + " vs " +
                                b.data_key() + ")");
  }
  if (a.sim.seed != b.sim.seed) throw std::invalid_argument("compare: mismatched seeds");
  const Dataset data = load_dataset(a);
  const RunResult ra = run_experiment(a, data);
  const RunResult rb = run_experiment(b, data);
  CompareReport rep;
  std::size_t j = 0;
  for (const auto& rec : ra.records) {
    while (j < rb.records.size() && rb.records[j].step < rec.step) ++j;
    if (j < rb.records.size() && rb.records[j].step == rec.step) {
      rep.rows.push_back({rec.step, rec.logloss_sum, rb.records[j].logloss_sum});
    }
  }
  rep.final_linf = linf_distance(ra.final_w, rb.final_w);
  rep.tx_a = ra.tx_values;
  rep.tx_b = rb.tx_values;
  return rep;
}

}  // namespace acomid
