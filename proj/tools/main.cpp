// synthlab command line: synth / analyze / compare / simulate / sdc.
// Every command takes --config; outputs are CSV files plus a plain-text
// manifest in the output directory.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "synthlab/analyze.hpp"
#include "synthlab/config.hpp"
#include "synthlab/csv.hpp"
#include "synthlab/engine.hpp"
#include "synthlab/sdc.hpp"
#include "synthlab/simlab/ratio_study.hpp"
#include "synthlab/simlab/srs_study.hpp"
#include "synthlab/simlab/strat_study.hpp"
#include "synthlab/utility.hpp"

namespace fs = std::filesystem;
using namespace synthlab;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

fs::path resolve_out_dir(const GlobalOpts& opts) {
  std::string dir = opts.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("SYNTHLAB_OUT_DIR");
    dir = env ? env : ".";
  }
  fs::create_directories(dir);
  return dir;
}

RunConfig load_config(const GlobalOpts& opts) {
  RunConfig cfg = parse_config_file(opts.config_path);
  if (opts.seed) {
    cfg.plan.master_seed = *opts.seed;
    cfg.simulate.seed = *opts.seed;
  }
  return cfg;
}

DataTable load_observed(const RunConfig& cfg) {
  if (!cfg.has_schema) throw std::invalid_argument("config needs a [schema] section");
  if (cfg.data_path.empty()) throw std::invalid_argument("config needs data.path");
  return parse_csv(cfg.data_path, cfg.schema);
}

std::vector<DataTable> load_synthetic(const RunConfig& cfg) {
  if (!cfg.has_schema) throw std::invalid_argument("config needs a [schema] section");
  if (cfg.synthetic_paths.empty())
    throw std::invalid_argument("config needs data.synthetic file list");
  std::vector<DataTable> out;
  for (const auto& p : cfg.synthetic_paths) out.push_back(parse_csv(p, cfg.schema));
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_synth(const GlobalOpts& opts) {
  RunConfig cfg = load_config(opts);
  DataTable observed = load_observed(cfg);
  fs::path dir = resolve_out_dir(opts);

  SynthesisOutput out = cfg.stratify.empty()
                            ? synthesize(observed, cfg.plan)
                            : synthesize_stratified(observed, cfg.plan, cfg.stratify);
  // labelling is mandatory; unique-removal and top-coding only when configured
  out = label_faux(std::move(out), cfg.sdc.label_text);
  std::size_t removed_total = 0, clamped_total = 0;
  for (auto& rep : out.replicates) {
    if (!cfg.sdc.key_variables.empty()) {
      RemovalReport rr;
      rep = remove_replicated_uniques(observed, rep, cfg.sdc.key_variables, &rr);
      removed_total += rr.removed;
    }
    if (!cfg.sdc.topcode.empty()) {
      std::size_t n = 0;
      rep = top_bottom_code(rep, cfg.sdc, &n);
      clamped_total += n;
    }
  }

  for (std::size_t l = 0; l < out.replicates.size(); ++l) {
    fs::path file = dir / ("synthetic_" + std::to_string(l + 1) + ".csv");
    std::ofstream os(file);
    write_csv(out.replicates[l], os, out.manifest.label_text);
  }
  std::string manifest = out.manifest.to_text();
  if (!cfg.sdc.key_variables.empty())
    manifest += "sdc.removed_replicated_uniques: " + std::to_string(removed_total) + "\n";
  if (!cfg.sdc.topcode.empty())
    manifest += "sdc.topcoded_cells: " + std::to_string(clamped_total) + "\n";
  write_text(dir / "manifest.txt", manifest);
  std::cout << "wrote " << out.replicates.size() << " replicates to " << dir
            << "\n";
  return 0;
}

int cmd_analyze(const GlobalOpts& opts) {
  RunConfig cfg = load_config(opts);
  if (cfg.formula.empty()) throw std::invalid_argument("config needs analysis.formula");
  std::vector<DataTable> reps = load_synthetic(cfg);
  long n = cfg.observed_n > 0 ? cfg.observed_n
                              : static_cast<long>(reps[0].n_rows());
  AnalysisSpec spec = parse_formula(cfg.formula, cfg.model);
  auto results = analyze_synthetic(reps, spec, cfg.estimator, n, cfg.ci_level,
                                   cfg.design_effect);

  fs::path dir = resolve_out_dir(opts);
  std::ostringstream csv;
  csv << "coefficient,estimate,se,ci_low,ci_high,estimator,flags\n";
  for (const auto& r : results) {
    std::string flags;
    if (r.negative_variance) flags += "negative_variance;";
    if (r.adjusted) flags += "adjusted;";
    csv << detail::csv_quote(r.coefficient) << "," << r.estimate << ","
        << (r.variance >= 0 ? std::to_string(std::sqrt(r.variance)) : "NA")
        << ",";
    if (std::isnan(r.ci_low)) csv << "NA,NA,";
    else csv << r.ci_low << "," << r.ci_high << ",";
    csv << detail::csv_quote(r.estimator_name) << "," << detail::csv_quote(flags) << "\n";
  }
  write_text(dir / "analysis.csv", csv.str());
  std::cout << "wrote " << (dir / "analysis.csv") << "\n";
  return 0;
}

int cmd_compare(const GlobalOpts& opts) {
  RunConfig cfg = load_config(opts);
  DataTable observed = load_observed(cfg);
  std::vector<DataTable> reps = load_synthetic(cfg);
  fs::path dir = resolve_out_dir(opts);

  for (const auto& var : cfg.compare_variables) {
    MarginalComparison cmp = compare_marginals(observed, reps, var, cfg.bin_width);
    std::ostringstream csv;
    csv << "bin,observed,synthetic,difference\n";
    for (std::size_t i = 0; i < cmp.bin_labels.size(); ++i)
      csv << detail::csv_quote(cmp.bin_labels[i]) << "," << cmp.observed[i] << ","
          << cmp.synthetic[i] << "," << cmp.synthetic[i] - cmp.observed[i]
          << "\n";
    write_text(dir / ("marginals_" + var + ".csv"), csv.str());
  }

  if (!cfg.formula.empty()) {
    AnalysisSpec spec = parse_formula(cfg.formula, cfg.model);
    CoefficientComparison cmp = compare_coefficients(observed, reps, spec);
    std::ostringstream csv;
    csv << "coefficient,observed,observed_se,synthetic,synthetic_lo,"
           "synthetic_hi,z,z_bias\n";
    for (const auto& r : cmp.rows)
      csv << detail::csv_quote(r.coefficient) << "," << r.observed << ","
          << r.observed_se << "," << r.synthetic << "," << r.synthetic_lo
          << "," << r.synthetic_hi << "," << r.z << "," << r.z_bias << "\n";
    csv << "# " << cmp.note << "\n";
    write_text(dir / "coefficients.csv", csv.str());
  }
  std::cout << "wrote comparison tables to " << dir << "\n";
  return 0;
}

void write_sim_report(const simlab::SimReport& report, const fs::path& file) {
  std::ostringstream csv;
  csv << "arm,target,true_value,mean_qbar,emp_variance,negative_tm_fraction,"
         "estimator,mean,variance,coverage,n_used\n";
  auto emit = [&](const char* arm, const simlab::TargetSummary& t) {
    for (const auto& [name, st] : t.estimators)
      csv << arm << "," << detail::csv_quote(t.name) << "," << t.true_value << ","
          << t.mean_qbar << "," << t.emp_variance << ","
          << t.negative_tm_fraction << "," << detail::csv_quote(name) << "," << st.mean
          << "," << st.variance << "," << st.coverage << "," << st.n_used
          << "\n";
  };
  for (const auto& t : report.plug_in) emit("plug-in", t);
  for (const auto& t : report.proper) emit("proper", t);
  for (const auto& note : report.notes) csv << "# " << note << "\n";
  write_text(file, csv.str());
}

int cmd_simulate(const GlobalOpts& opts) {
  RunConfig cfg = load_config(opts);
  if (!cfg.has_simulate) throw std::invalid_argument("config needs a [simulate] section");
  const SimulateConfig& sim = cfg.simulate;
  fs::path dir = resolve_out_dir(opts);

  if (sim.study == "srs") {
    simlab::SrsSimConfig c;
    if (sim.n_sims > 0) c.n_sims = sim.n_sims;
    if (sim.M > 0) c.M = sim.M;
    if (sim.n > 0) c.n = sim.n;
    if (sim.k > 0) c.k = sim.k;
    c.seed = sim.seed;
    write_sim_report(simlab::run_srs_simulation(c), dir / "simulation_srs.csv");
  } else if (sim.study == "stratified") {
    auto c = simlab::StratSimConfig::configuration(
        sim.configuration, sim.n_sims > 0 ? sim.n_sims : 1000, sim.seed);
    if (sim.M > 0) c.M = sim.M;
    write_sim_report(simlab::run_stratified_simulation(c),
                     dir / "simulation_stratified.csv");
  } else if (sim.study == "ratio") {
    simlab::RatioStudyConfig c;
    if (sim.n > 0) c.n = sim.n;
    if (sim.M > 0) c.M = sim.M;
    if (sim.n_reps > 0) c.n_reps = sim.n_reps;
    c.seed = sim.seed;
    simlab::RatioReport rep = simlab::run_ratio_study(c);
    std::ostringstream csv;
    csv << "coefficient,ratio_ts,ratio_tsppd,ratio_tp,ratio_tm,tm_na_count\n";
    for (const auto& r : rep.rows) {
      csv << detail::csv_quote(r.coefficient) << "," << r.ts << "," << r.tsppd << ","
          << r.tp << ",";
      if (r.tm_na_count == r.n_reps) csv << "NA";
      else csv << r.tm;
      csv << "," << r.tm_na_count << "\n";
    }
    csv << "# grand_mean_ts=" << rep.grand_mean_ts
        << " grand_mean_tsppd=" << rep.grand_mean_tsppd << "\n";
    write_text(dir / "simulation_ratio.csv", csv.str());
  } else if (sim.study == "interaction") {
    auto r = simlab::run_interaction_study(
        sim.n_seeds > 0 ? sim.n_seeds : 50, sim.seed);
    std::ostringstream csv;
    csv << "n_seeds,shrunk,shrinkage_rate\n"
        << r.n_seeds << "," << r.shrunk << "," << r.shrinkage_rate << "\n";
    write_text(dir / "simulation_interaction.csv", csv.str());
  } else {
    throw std::invalid_argument("unknown simulate.study: " + sim.study);
  }
  std::ostringstream manifest;
  manifest << "study: " << sim.study << "\nseed: " << sim.seed << "\n";
  write_text(dir / "simulation_manifest.txt", manifest.str());
  std::cout << "wrote simulation results to " << dir << "\n";
  return 0;
}

int cmd_sdc(const GlobalOpts& opts) {
  RunConfig cfg = load_config(opts);
  DataTable observed = load_observed(cfg);
  std::vector<DataTable> reps = load_synthetic(cfg);
  fs::path dir = resolve_out_dir(opts);

  std::size_t removed_total = 0, clamped_total = 0;
  for (std::size_t l = 0; l < reps.size(); ++l) {
    DataTable rep = reps[l];
    if (!cfg.sdc.key_variables.empty()) {
      RemovalReport rr;
      rep = remove_replicated_uniques(observed, rep, cfg.sdc.key_variables, &rr);
      removed_total += rr.removed;
    }
    if (!cfg.sdc.topcode.empty()) {
      std::size_t n = 0;
      rep = top_bottom_code(rep, cfg.sdc, &n);
      clamped_total += n;
    }
    fs::path file = dir / ("cleaned_" + std::to_string(l + 1) + ".csv");
    std::ofstream os(file);
    write_csv(rep, os, cfg.sdc.label_text);  // labelling always applied
  }
  std::ostringstream manifest;
  manifest << "label: " << cfg.sdc.label_text << "\n";
  if (!cfg.sdc.key_variables.empty())
    manifest << "sdc.removed_replicated_uniques: " << removed_total << "\n";
  if (!cfg.sdc.topcode.empty())
    manifest << "sdc.topcoded_cells: " << clamped_total << "\n";
  write_text(dir / "sdc_manifest.txt", manifest.str());
  std::cout << "wrote " << reps.size() << " cleaned files to " << dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequential conditional synthesis of tabular microdata"};
  app.require_subcommand(1);

  GlobalOpts opts;
  app.add_option("--config", opts.config_path, "configuration file")->required();
  app.add_option("--seed", opts.seed, "override the configured seed");
  app.add_option("--out-dir", opts.out_dir,
                 "output directory (default: $SYNTHLAB_OUT_DIR or .)");
  app.add_option("--threads", opts.threads, "worker cap");

  auto* synth = app.add_subcommand("synth", "generate labelled synthetic data");
  auto* analyze = app.add_subcommand("analyze", "pooled inference from replicates");
  auto* compare = app.add_subcommand("compare", "observed vs synthetic comparisons");
  auto* simulate = app.add_subcommand("simulate", "run a simulation study");
  auto* sdc = app.add_subcommand("sdc", "disclosure-control pass over replicates");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(opts);
    if (analyze->parsed()) return cmd_analyze(opts);
    if (compare->parsed()) return cmd_compare(opts);
    if (simulate->parsed()) return cmd_simulate(opts);
    if (sdc->parsed()) return cmd_sdc(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
