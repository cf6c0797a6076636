#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "rrhmm/builtin_models.hpp"
#include "rrhmm/diagnostics.hpp"
#include "rrhmm/error.hpp"
#include "rrhmm/inference.hpp"
#include "rrhmm/io.hpp"
#include "rrhmm/kde.hpp"
#include "rrhmm/moments.hpp"
#include "rrhmm/spectral.hpp"

namespace rrhmm::cli {
namespace {

namespace fs = std::filesystem;
using io::Json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string model = "example1";
  std::string truth;
  std::string data;
  std::string out;
  std::string mode = "restart";
  std::string manifest;
  std::string experiment;
  std::string ns = "10000,100000";
  int polygon_states = 10;
  int k = 0;
  double threshold = 0.0;
  int window = 1;
  int alphabet = 0;
  long long count = -1;
  long long length = -1;
  int t = 3;
  int trials = 20;
  std::uint64_t seed = 1;
  double floor = kDefaultNormalizerFloor;
  int horizon = kDefaultDistrustHorizon;
  int centers = 0;
  double bandwidth = 0.0;
  bool continuous = false;
  bool whiten = false;
};

// Builtin name or path to a model JSON file.
RrHmmParams load_params(const std::string& source, int polygon_states) {
  for (const auto& name : builtin_model_names())
    if (source == name) return builtin_model(source, polygon_states).params;
  if (!fs::exists(source))
    throw Error(ErrorCode::InvalidArgument, "'" + source + "' is neither a builtin model nor a file");
  return io::params_from_json(io::read_json(source));
}

std::vector<std::size_t> parse_ns(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& cell : io::split_csv_line(text)) {
    if (cell.empty()) continue;
    try {
      out.push_back(static_cast<std::size_t>(std::stoull(cell)));
    } catch (const std::exception&) {
      throw UsageError("--ns expects a comma-separated list of sample counts");
    }
  }
  if (out.empty()) throw UsageError("--ns is empty");
  return out;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream o(path);
  if (!o) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return o;
}

fs::path manifest_path(const std::string& out) { return out + ".manifest.json"; }

void write_manifest(const std::string& subcommand, const std::vector<std::string>& args,
                    const CLI::App& sub, const Options& o, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, double seconds) {
  if (o.out.empty()) return;
  Json flags = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const auto& name = opt->get_lnames().front();
    if (name == "help") continue;
    flags[name] = opt->count() > 0 ? opt->as<std::string>() : opt->get_default_str();
  }
  const Json m = {{"subcommand", subcommand},
                  {"argv", args},
                  {"flags", flags},
                  {"seed", o.seed},
                  {"inputs", inputs},
                  {"outputs", outputs},
                  {"wall_clock_seconds", seconds},
                  {"version", kVersion}};
  io::write_json(manifest_path(o.out), m);
}

void print_spectrum(std::ostream& out, const Vector& sigma) {
  out << "singular values of P21:";
  for (Eigen::Index i = 0; i < sigma.size(); ++i) out << ' ' << io::format_double(sigma(i));
  out << '\n';
}

// ---------------------------------------------------------------- commands

void cmd_gen(const Options& o, std::ostream& out, std::vector<std::string>& outputs) {
  const RrHmmParams p = load_params(o.model, o.polygon_states);
  if (o.out.empty()) throw UsageError("gen needs --out");
  if ((o.count >= 0) == (o.length >= 0)) throw UsageError("gen needs exactly one of --n or --length");
  auto file = open_out(o.out);
  if (o.count >= 0) {
    const SampleMode mode = o.mode == "sliding" ? SampleMode::Sliding : SampleMode::Restart;
    io::write_triples_csv(file, sample_triples(p, static_cast<std::size_t>(o.count), o.seed, mode));
    out << "wrote " << o.count << " triples to " << o.out << '\n';
  } else {
    io::write_sequence_csv(file, sample_sequence(p, static_cast<std::size_t>(o.length), o.seed));
    out << "wrote a length-" << o.length << " sequence to " << o.out << '\n';
  }
  outputs.push_back(o.out);
}

MomentEstimates moments_from_dataset(const Options& o) {
  if (!o.truth.empty())
    return population_moments_stacked(load_params(o.truth, o.polygon_states), o.window);
  if (o.data.empty()) throw UsageError("need --data or --truth");
  if (fs::path(o.data).extension() == ".json") return io::moments_from_json(io::read_json(o.data));
  const io::Dataset d = io::read_dataset_csv(fs::path(o.data));
  const int n = o.alphabet > 0 ? o.alphabet : d.alphabet_hint();
  if (d.kind == io::DatasetKind::Triples) {
    if (o.window != 1) throw UsageError("stacked windows need a sequence dataset");
    return estimate_moments(d.triples, n);
  }
  return estimate_moments_stacked(d.sequence, n, o.window);
}

void cmd_estimate(const Options& o, std::ostream& out, std::vector<std::string>& outputs) {
  if (o.out.empty()) throw UsageError("estimate needs --out");
  const MomentEstimates m = moments_from_dataset(o);
  io::write_json(o.out, io::moments_to_json(m));
  out << "wrote moments over " << m.events.n_events() << " events to " << o.out << '\n';
  outputs.push_back(o.out);
}

void cmd_learn(const Options& o, std::ostream& out, std::vector<std::string>& outputs) {
  if (o.out.empty()) throw UsageError("learn needs --out");
  if ((o.k > 0) == (o.threshold > 0.0)) throw UsageError("learn needs exactly one of --k or --threshold");

  std::optional<kde::KdeConfig> config;
  MomentEstimates mom;
  if (o.continuous) {
    if (o.data.empty()) throw UsageError("--continuous needs --data");
    const auto points = io::read_points_csv(fs::path(o.data));
    config = kde::make_config(points, o.centers > 0 ? o.centers : 20, o.whiten);
    if (o.bandwidth > 0.0) config->bandwidth = o.bandwidth;
    const auto triples = kde::sliding_triples(points);
    mom = kde::estimate_moments_kde(triples, *config);
  } else {
    mom = moments_from_dataset(o);
  }

  const RankSelection sel = select_rank(mom, o.threshold > 0.0 ? o.threshold : kDefaultRankThreshold);
  print_spectrum(out, sel.singular_values);
  const int k = o.k > 0 ? o.k : sel.chosen_k;
  if (o.threshold > 0.0) out << "selected k = " << k << " at threshold " << o.threshold << '\n';

  LearnOptions lo;
  lo.normalizer_floor = o.floor;
  const ObservableModel model = learn(mom, k, lo);
  Json j = io::model_to_json(model);
  if (config) j["kde"] = io::kde_config_to_json(*config);
  io::write_json(o.out, j);
  out << "learned rank-" << k << " model with " << model.n_base() << " operators -> " << o.out << '\n';
  outputs.push_back(o.out);
}

struct LoadedModel {
  ObservableModel model;
  std::optional<kde::KdeConfig> kde;
};

LoadedModel load_model(const std::string& path) {
  const Json j = io::read_json(path);
  LoadedModel lm{io::model_from_json(j), std::nullopt};
  if (j.contains("kde")) lm.kde = io::kde_config_from_json(j["kde"]);
  return lm;
}

void cmd_eval(const Options& o, std::ostream& out, std::vector<std::string>& outputs) {
  if (o.truth.empty()) throw UsageError("eval needs --truth");
  const LoadedModel lm = load_model(o.model);
  const RrHmmParams truth = load_params(o.truth, o.polygon_states);
  if (lm.model.n_base() != truth.n) throw UsageError("model and truth alphabets differ");

  const double l1 = l1_joint_error(lm.model, truth, o.t);
  const double norm = lm.model.b_inf.dot(lm.model.b1);
  out << "l1_joint_error(t=" << o.t << ")," << io::format_double(l1) << '\n';
  out << "b_inf_dot_b1," << io::format_double(norm) << '\n';

  EigenRecoveryResult eig;
  eig.true_eigs = transition_eigenvalues(truth.T, lm.model.k);
  Eigen::EigenSolver<Matrix> es(lm.model.operator_sum(), false);
  std::vector<std::complex<double>> est(es.eigenvalues().data(),
                                        es.eigenvalues().data() + es.eigenvalues().size());
  if (est.size() != eig.true_eigs.size()) {
    out << "eigen comparison skipped: model rank " << est.size() << " vs " << eig.true_eigs.size()
        << " nonzero eigenvalues of T\n";
    return;
  }
  eig.trials.push_back({lm.model.sample_count.value_or(0), 0, match_eigenvalues(eig.true_eigs, est)});
  io::write_eigen_trials_csv(out, "eval", eig);
  if (!o.out.empty()) {
    auto file = open_out(o.out);
    io::write_eigen_trials_csv(file, "eval", eig);
    outputs.push_back(o.out);
  }
}

void cmd_filter(const Options& o, std::ostream& out, std::vector<std::string>& outputs) {
  if (o.out.empty() || o.data.empty()) throw UsageError("filter needs --data and --out");
  LoadedModel lm = load_model(o.model);
  lm.model.normalizer_floor = o.floor;
  std::vector<TraceRow> rows;
  if (lm.kde) {
    const auto points = io::read_points_csv(fs::path(o.data));
    BeliefState state = init_belief(lm.model);
    for (const auto& x : points) {
      TraceRow r;
      r.step = state.step;
      try {
        r.predictive = predictive(lm.model, state).prob;
      } catch (const Error&) {
        r.predictive = Vector::Constant(lm.model.n_base(), std::nan(""));
      }
      const Vector sigma = kde::featurize(x, *lm.kde, true);
      Eigen::Index best = 0;
      sigma.maxCoeff(&best);
      r.symbol = static_cast<Symbol>(best);
      state = kde::filter_continuous(lm.model, state, x, *lm.kde, o.horizon);
      r.normalizer = state.last_normalizer;
      r.trust = state.trust();
      rows.push_back(std::move(r));
    }
  } else {
    const io::Dataset d = io::read_dataset_csv(fs::path(o.data));
    if (d.kind != io::DatasetKind::Sequence) throw UsageError("filter needs a sequence dataset");
    rows = filter_trace(lm.model, d.sequence, o.horizon);
  }
  auto file = open_out(o.out);
  io::write_trace_csv(file, rows, lm.model.n_base());
  out << "filtered " << rows.size() << " steps -> " << o.out << '\n';
  outputs.push_back(o.out);
}

void cmd_simulate(const Options& o, std::ostream& out, std::vector<std::string>& outputs,
                  int& status) {
  if (o.out.empty()) throw UsageError("simulate needs --out");
  if (o.length < 0) throw UsageError("simulate needs --length");
  LoadedModel lm = load_model(o.model);
  lm.model.normalizer_floor = o.floor;
  const SimulationResult sim = simulate(lm.model, static_cast<std::size_t>(o.length), o.seed);
  auto file = open_out(o.out);
  io::write_sequence_csv(file, sim.symbols);
  outputs.push_back(o.out);
  if (sim.aborted) {
    out << "simulation aborted after " << sim.symbols.size() << " steps: " << sim.reason << '\n';
    status = 1;
    return;
  }
  out << "simulated " << sim.symbols.size() << " symbols -> " << o.out << '\n';
}

void cmd_experiment(const Options& o, std::ostream& out, std::vector<std::string>& outputs) {
  if (o.experiment != "eigen-recovery" && o.experiment != "l1-curve")
    throw UsageError("unknown experiment '" + o.experiment + "'; choices: eigen-recovery, l1-curve");
  if (o.out.empty()) throw UsageError("experiment needs --out (output prefix)");
  const RrHmmParams p = load_params(o.model, o.polygon_states);
  ExperimentConfig cfg;
  cfg.Ns = parse_ns(o.ns);
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.window = o.window;
  const int k = o.k > 0 ? o.k : p.k;
  const std::string trials_path = o.out + "_trials.csv";
  const std::string summary_path = o.out + "_summary.csv";
  auto trials = open_out(trials_path);
  auto summary = open_out(summary_path);
  if (o.experiment == "eigen-recovery") {
    const auto r = eigen_recovery_experiment(p, k, cfg);
    io::write_eigen_trials_csv(trials, o.experiment, r);
    io::write_eigen_summary_csv(summary, o.experiment, r);
    io::write_eigen_summary_csv(out, o.experiment, r);
  } else {
    const auto r = l1_error_experiment(p, k, o.t, cfg);
    io::write_l1_trials_csv(trials, o.experiment, r);
    io::write_l1_summary_csv(summary, o.experiment, r);
    io::write_l1_summary_csv(out, o.experiment, r);
  }
  outputs.push_back(trials_path);
  outputs.push_back(summary_path);
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::RankTooLarge:
    case ErrorCode::InvalidArgument:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Spectral learning and inference for reduced-rank HMMs", "rrhmm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto add_model = [&](CLI::App* s, const std::string& help) {
    s->add_option("--model", o.model, help)->capture_default_str();
    s->add_option("--m", o.polygon_states, "state count for the polygon model")->capture_default_str();
  };
  auto add_seed = [&](CLI::App* s) { s->add_option("--seed", o.seed, "RNG seed")->capture_default_str(); };
  auto add_out = [&](CLI::App* s) { s->add_option("--out", o.out, "output path"); };

  auto* gen = app.add_subcommand("gen", "sample a dataset from a model");
  add_model(gen, "builtin model (example1|example2|example3|polygon) or model JSON");
  gen->add_option("--n", o.count, "number of triples");
  gen->add_option("--length", o.length, "length of one sequence");
  gen->add_option("--mode", o.mode, "triple sampling: restart | sliding")
      ->check(CLI::IsMember({"restart", "sliding"}))
      ->capture_default_str();
  add_seed(gen);
  add_out(gen);

  auto add_moment_source = [&](CLI::App* s) {
    s->add_option("--data", o.data, "dataset CSV or moments JSON");
    s->add_option("--truth", o.truth, "learn from exact moments of this model instead of data");
    s->add_option("--window", o.window, "stacking length")->capture_default_str();
    s->add_option("--alphabet", o.alphabet, "alphabet size (default: max symbol + 1)");
    s->add_option("--m", o.polygon_states, "state count for the polygon model")->capture_default_str();
  };

  auto* est = app.add_subcommand("estimate", "estimate moments from a dataset");
  add_moment_source(est);
  add_out(est);

  auto* lrn = app.add_subcommand("learn", "learn an observable model");
  add_moment_source(lrn);
  lrn->add_option("--k", o.k, "model rank");
  lrn->add_option("--threshold", o.threshold, "relative singular-value threshold for rank selection");
  lrn->add_option("--floor", o.floor, "normalizer floor")->capture_default_str();
  lrn->add_flag("--continuous", o.continuous, "data is a CSV of real-valued points");
  lrn->add_option("--centers", o.centers, "number of kernel centers (continuous)");
  lrn->add_option("--bandwidth", o.bandwidth, "kernel bandwidth override (continuous)");
  lrn->add_flag("--whiten", o.whiten, "whiten points before placing kernels");
  add_out(lrn);

  auto* ev = app.add_subcommand("eval", "compare a learned model with the true model");
  ev->add_option("--model", o.model, "learned model JSON")->required();
  ev->add_option("--truth", o.truth, "true model (builtin or JSON)")->required();
  ev->add_option("--m", o.polygon_states, "state count for the polygon model")->capture_default_str();
  ev->add_option("--t", o.t, "sequence length for the L1 joint error")->capture_default_str();
  add_out(ev);

  auto* flt = app.add_subcommand("filter", "filter a stream and write a trace");
  flt->add_option("--model", o.model, "learned model JSON")->required();
  flt->add_option("--data", o.data, "sequence CSV (or point CSV for continuous models)");
  flt->add_option("--floor", o.floor, "normalizer floor")->capture_default_str();
  flt->add_option("--horizon", o.horizon, "steps to distrust after an underflow")->capture_default_str();
  add_out(flt);

  auto* sim = app.add_subcommand("simulate", "sample a sequence from a learned model");
  sim->add_option("--model", o.model, "learned model JSON")->required();
  sim->add_option("--length", o.length, "sequence length");
  sim->add_option("--floor", o.floor, "normalizer floor")->capture_default_str();
  add_seed(sim);
  add_out(sim);

  auto* exp = app.add_subcommand("experiment", "run a named synthetic experiment");
  exp->add_option("name", o.experiment, "eigen-recovery | l1-curve")->required();
  add_model(exp, "builtin model or model JSON");
  exp->add_option("--k", o.k, "model rank (default: true rank)");
  exp->add_option("--window", o.window, "stacking length")->capture_default_str();
  exp->add_option("--ns", o.ns, "comma-separated sample counts")->capture_default_str();
  exp->add_option("--trials", o.trials, "trials per sample count")->capture_default_str();
  exp->add_option("--t", o.t, "sequence length (l1-curve)")->capture_default_str();
  add_seed(exp);
  add_out(exp);

  auto* rep = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  rep->add_option("manifest", o.manifest, "manifest JSON")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return 2;
  }

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> inputs, outputs;
  if (!o.data.empty()) inputs.push_back(o.data);
  int status = 0;
  CLI::App* used = app.get_subcommands().front();
  const std::string name = used->get_name();
  try {
    if (name == "gen") cmd_gen(o, out, outputs);
    else if (name == "estimate") cmd_estimate(o, out, outputs);
    else if (name == "learn") cmd_learn(o, out, outputs);
    else if (name == "eval") cmd_eval(o, out, outputs);
    else if (name == "filter") cmd_filter(o, out, outputs);
    else if (name == "simulate") cmd_simulate(o, out, outputs, status);
    else if (name == "experiment") cmd_experiment(o, out, outputs);
    else if (name == "replay") {
      const Json m = io::read_json(o.manifest);
      return run(m.at("argv").get<std::vector<std::string>>(), out, err);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_manifest(name, args, *used, o, inputs, outputs, seconds);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return status;
}

}  // namespace rrhmm::cli
