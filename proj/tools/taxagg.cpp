#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "taxagg/errors.hpp"
#include "taxagg/estimation.hpp"
#include "taxagg/eval_metrics.hpp"
#include "taxagg/inference.hpp"
#include "taxagg/io.hpp"
#include "taxagg/path_decision.hpp"
#include "taxagg/propagation.hpp"
#include "taxagg/synthetic.hpp"

namespace {

using namespace taxagg;

std::ostream& open_sink(const std::string& path, std::ofstream& file) {
  if (path == "-") return std::cout;
  file.open(path);
  if (!file) throw Error(ErrorCode::generic, "cannot write " + path);
  return file;
}

// Fixed-slot parallel map over instance indices: output order never depends
// on scheduling. The first worker exception is rethrown after the join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  std::vector<std::thread> pool;
  int width = std::min<int>(threads, static_cast<int>(count));
  pool.reserve(static_cast<std::size_t>(width));
  for (int w = 0; w < width; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> guard(failure_lock);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::string join_path(const LabelPath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    if (i) out += '|';
    out += path.nodes[i];
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t lo = s.find_first_not_of(" \t\r");
  if (lo == std::string::npos) return "";
  std::size_t hi = s.find_last_not_of(" \t\r");
  return s.substr(lo, hi - lo + 1);
}

// Flat key=value config support: keys mirror the long option names of the
// chosen subcommand. Values from the file are appended as trailing flags for
// every key the command line does not set, so explicit flags always win.
std::vector<std::string> merge_config_args(std::vector<std::string> args) {
  if (args.empty() || args[0].rfind("--", 0) == 0) return args;

  std::string config_path;
  std::set<std::string> explicit_keys;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i].rfind("--", 0) != 0) continue;
    std::string key = args[i].substr(2);
    explicit_keys.insert(key);
    if (key == "config" && i + 1 < args.size()) config_path = args[i + 1];
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw Error(ErrorCode::parse, "cannot open config " + config_path);
  std::map<std::string, std::string> from_file;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    std::size_t eq = body.find('=');
    if (eq == std::string::npos || trim(body.substr(0, eq)).empty()) {
      throw ParseError(config_path, line_no, "expected key=value");
    }
    from_file[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
  }
  for (const auto& [key, value] : from_file) {
    if (key == "config" || explicit_keys.count(key)) continue;
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

struct AggregateSettings {
  std::string taxonomy_path;
  std::string sheets_path;
  std::string method = "heuristic";
  double theta = 0.3;
  std::string entropy_mode = "value";
  double tau = 0.5;
  std::string params_path;
  std::string entry_path;
  std::string weights_path;
  std::string out_path = "-";
  std::string pred_out;
  int threads = 1;
  int treewidth_cap = 20;
  std::size_t root_paths_cap = 64;
};

std::map<std::string, std::string> digest_map(const AggregateSettings& s) {
  return {
      {"command", "aggregate"},       {"taxonomy", s.taxonomy_path},
      {"sheets", s.sheets_path},      {"method", s.method},
      {"theta", format_double(s.theta)}, {"entropy-mode", s.entropy_mode},
      {"tau", format_double(s.tau)},  {"params", s.params_path},
      {"entry-level", s.entry_path},  {"weights", s.weights_path},
  };
}

int run_aggregate(const AggregateSettings& s) {
  Taxonomy t = load_taxonomy(s.taxonomy_path);
  std::vector<ScoreSheet> sheets = load_sheets(s.sheets_path, &t);
  std::set<ClassId> entry_set;
  if (!s.entry_path.empty()) entry_set = load_entry_set(s.entry_path, &t);

  MetaHeader meta;
  meta.command = "aggregate " + s.method;
  meta.config_digest = config_digest(digest_map(s));

  struct Record {
    std::string terminal;
    std::string path;
    std::string alternatives;
    std::string values;
    bool entry_missing = false;
  };
  std::vector<Record> records(sheets.size());

  auto finish_record = [&](Record& rec, const Taxonomy& graph, LabelPath path,
                           const std::map<ClassId, double>& values) {
    if (!entry_set.empty()) {
      BackoffResult backed = entry_level_backoff(path, entry_set);
      rec.entry_missing = !backed.entry_found;
      path = backed.path;
    }
    rec.terminal = path.terminal();
    rec.path = join_path(path);
    std::string alts;
    for (const LabelPath& alt : graph.root_paths(path.terminal(), s.root_paths_cap)) {
      if (!alts.empty()) alts += ';';
      alts += join_path(alt);
    }
    rec.alternatives = alts;
    std::string vals;
    for (const auto& [class_id, value] : values) {
      if (!vals.empty()) vals += ',';
      vals += class_id + "=" + format_double(value);
    }
    rec.values = vals;
  };

  if (s.method == "heuristic") {
    EntropyPolicy policy;
    policy.theta = s.theta;
    policy.mode = s.entropy_mode == "distribution" ? EntropyMode::distribution : EntropyMode::value;
    parallel_for(sheets.size(), s.threads, [&](std::size_t i) {
      PropagatedScores scored = propagate(t, sheets[i]);
      const Taxonomy& g = scored.graph;
      int start = -1;
      for (int r : g.roots()) {
        if (start < 0 || scored.score.at(g.name_of(r)) > scored.score.at(g.name_of(start))) {
          start = r;
        }
      }
      LabelPath path = walk_entropy(scored, policy, g.name_of(start));
      finish_record(records[i], g, std::move(path), scored.score);
    });
  } else if (s.method == "graphical") {
    if (s.params_path.empty()) {
      throw ValidationError("graphical aggregation needs --params");
    }
    NetworkConfig net_cfg;
    if (!s.weights_path.empty()) net_cfg.leaf_weight = load_weights(s.weights_path);
    std::vector<ObservationParams> params = load_params(s.params_path, &t);
    Network net = build_network(t, params, net_cfg);
    JunctionTree jt(net, s.treewidth_cap);
    std::map<std::pair<std::string, ClassId>, const ObservationParams*> hooks;
    for (const auto& p : net.hooks()) hooks[{p.classifier_id, p.class_id}] = &p;

    parallel_for(sheets.size(), s.threads, [&](std::size_t i) {
      std::vector<EvidenceFactor> evidence;
      for (const auto& [classifier, class_scores] : sheets[i].scores) {
        for (const auto& [class_id, score] : class_scores) {
          auto it = hooks.find({classifier, class_id});
          if (it == hooks.end()) {
            throw ValidationError("no fitted model for classifier " + classifier + ", class " +
                                  class_id);
          }
          double observed = it->second->is_binormal() ? transform_score(score) : score;
          evidence.push_back(score_evidence(*it->second, observed));
        }
      }
      PosteriorReport rep = jt.infer(evidence, sheets[i].instance_id);
      LabelPath path = walk_marginal(rep, net.graph(), s.tau);
      finish_record(records[i], net.graph(), std::move(path), rep.marginal);
    });
  } else {
    throw ValidationError("unknown method '" + s.method + "'");
  }

  std::ofstream file;
  std::ostream& os = open_sink(s.out_path, file);
  os << format_meta_header(meta);
  os << "instance_id\tmethod\tterminal\tpath\troot_paths\tnode_values\n";
  std::map<std::string, ClassId> terminals;
  for (std::size_t i = 0; i < sheets.size(); ++i) {
    os << sheets[i].instance_id << '\t' << s.method << '\t' << records[i].terminal << '\t'
       << records[i].path << '\t' << records[i].alternatives << '\t' << records[i].values;
    if (records[i].entry_missing) os << "\tentry-missing";
    os << '\n';
    terminals[sheets[i].instance_id] = records[i].terminal;
  }
  if (!s.pred_out.empty()) save_predictions(s.pred_out, terminals, meta);
  return 0;
}

int run_validate(const std::string& path) {
  Taxonomy t = load_taxonomy(path);
  std::cout << "classes\t" << t.size() << "\n";
  std::cout << "edges\t" << t.edge_list().size() << "\n";
  std::cout << "roots\t" << t.roots().size() << "\n";
  std::cout << "leaves\t" << t.leaves().size() << "\n";
  int max_depth = 0;
  for (int i = 0; i < t.size(); ++i) max_depth = std::max(max_depth, t.depth(i));
  std::cout << "max_depth\t" << max_depth << "\n";
  for (const std::string& w : t.build_warnings()) std::cerr << "warning: " << w << "\n";
  std::cout << "ok\n";
  return 0;
}

struct FitSettings {
  std::string taxonomy_path, sheets_path, gold_path, out_path = "-";
  std::string kind = "binormal";
  double sigma_floor = 1e-3;
  double smoothing = 1.0;
};

int run_fit(const FitSettings& s) {
  Taxonomy t = load_taxonomy(s.taxonomy_path);
  auto sheets = load_sheets(s.sheets_path, &t);
  auto golds = load_gold(s.gold_path, &t);
  FitKind kind = s.kind == "discrete" ? FitKind::discrete : FitKind::binormal;
  auto params = fit_from_validation(t, sheets, golds, kind, s.sigma_floor, s.smoothing);

  MetaHeader meta;
  meta.command = "fit";
  meta.config_digest = config_digest({{"command", "fit"},
                                      {"taxonomy", s.taxonomy_path},
                                      {"sheets", s.sheets_path},
                                      {"gold", s.gold_path},
                                      {"kind", s.kind},
                                      {"sigma-floor", format_double(s.sigma_floor)},
                                      {"smoothing", format_double(s.smoothing)}});
  std::ofstream file;
  save_params(open_sink(s.out_path, file), params, meta);
  return 0;
}

struct EmSettings {
  std::string taxonomy_path, sheets_path, init_path, gold_path, out_path = "-";
  std::string soft_labels_path, trace_path;
  int max_iters = 50;
  double tol = 1e-4;
  double sigma_floor = 1e-3;
  double smoothing = 1.0;
};

int run_em(const EmSettings& s) {
  Taxonomy t = load_taxonomy(s.taxonomy_path);
  auto sheets = load_sheets(s.sheets_path, &t);

  std::vector<ObservationParams> init;
  if (!s.init_path.empty()) {
    init = load_params(s.init_path, &t);
  } else if (!s.gold_path.empty()) {
    auto golds = load_gold(s.gold_path, &t);
    init = fit_from_validation(t, sheets, golds, FitKind::binormal, s.sigma_floor, s.smoothing);
  } else {
    init = default_em_init(sheets);
  }

  EmOptions opts;
  opts.max_iters = s.max_iters;
  opts.tol = s.tol;
  opts.sigma_floor = s.sigma_floor;
  opts.smoothing = s.smoothing;
  EmResult result = em_fit(t, sheets, std::move(init), opts);

  MetaHeader meta;
  meta.command = "em";
  meta.config_digest = config_digest({{"command", "em"},
                                      {"taxonomy", s.taxonomy_path},
                                      {"sheets", s.sheets_path},
                                      {"init", s.init_path},
                                      {"gold", s.gold_path},
                                      {"max-iters", std::to_string(s.max_iters)},
                                      {"tol", format_double(s.tol)},
                                      {"sigma-floor", format_double(s.sigma_floor)},
                                      {"smoothing", format_double(s.smoothing)}});
  meta.extra.emplace_back("iterations", std::to_string(result.log_likelihood.size()));
  meta.extra.emplace_back("converged", result.converged ? "yes" : "no");

  std::ofstream file;
  save_params(open_sink(s.out_path, file), result.params, meta);
  if (!s.soft_labels_path.empty()) save_soft_labels(s.soft_labels_path, result.labels, meta);
  if (!s.trace_path.empty()) save_trace(s.trace_path, result.log_likelihood, meta);
  return 0;
}

struct EvalSettings {
  std::string taxonomy_path, pred_path, gold_path, out_path = "-";
};

int run_evaluate(const EvalSettings& s) {
  Taxonomy t = load_taxonomy(s.taxonomy_path);
  auto preds_multi = load_gold(s.pred_path, &t);  // same line format
  auto golds = load_gold(s.gold_path, &t);
  std::map<std::string, ClassId> preds;
  for (const auto& [instance, classes] : preds_multi) {
    if (classes.size() != 1) {
      throw ValidationError("instance " + instance + " has " + std::to_string(classes.size()) +
                            " predictions; exactly one expected");
    }
    preds[instance] = classes.front();
  }
  EvalReport report = evaluate(t, preds, golds);

  MetaHeader meta;
  meta.command = "evaluate";
  meta.config_digest = config_digest({{"command", "evaluate"},
                                      {"taxonomy", s.taxonomy_path},
                                      {"pred", s.pred_path},
                                      {"gold", s.gold_path}});
  std::ofstream file;
  save_eval_report(open_sink(s.out_path, file), report, meta);
  return 0;
}

struct SimulateSettings {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  GenConfig cfg;
};

int run_simulate(SimulateSettings& s) {
  s.cfg.seed = s.seed;
  Taxonomy t = gen_taxonomy(s.cfg);
  SimData sim = gen_instances(s.cfg, t);

  MetaHeader meta;
  meta.command = "simulate";
  meta.has_seed = true;
  meta.seed = s.seed;
  meta.config_digest = config_digest({
      {"command", "simulate"},
      {"seed", std::to_string(s.seed)},
      {"depth", std::to_string(s.cfg.depth)},
      {"branch-min", std::to_string(s.cfg.branch_min)},
      {"branch-max", std::to_string(s.cfg.branch_max)},
      {"extra-parent-prob", format_double(s.cfg.extra_parent_prob)},
      {"classifiers", std::to_string(s.cfg.num_classifiers)},
      {"classes-per-classifier", std::to_string(s.cfg.classes_per_classifier)},
      {"instances", std::to_string(s.cfg.num_instances)},
      {"mu0", format_double(s.cfg.true_model.mu_off)},
      {"sigma0", format_double(s.cfg.true_model.sigma_off)},
      {"mu1", format_double(s.cfg.true_model.mu_on)},
      {"sigma1", format_double(s.cfg.true_model.sigma_on)},
  });
  meta.extra.emplace_back("rng", sim.rng_name);

  namespace fs = std::filesystem;
  fs::create_directories(s.out_dir);
  save_taxonomy((fs::path(s.out_dir) / "taxonomy.tsv").string(), t, meta);
  save_sheets((fs::path(s.out_dir) / "sheets.tsv").string(), sim.sheets, meta);
  save_gold((fs::path(s.out_dir) / "gold.tsv").string(), sim.golds, meta);
  save_params((fs::path(s.out_dir) / "params_true.tsv").string(), sim.true_params, meta);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aggregates flat-classifier scores into label paths of a class taxonomy"};
  app.set_version_flag("--version", std::string("taxagg ") + taxagg::kToolVersion);
  app.require_subcommand(1);

  std::string config_path;  // consumed by merge_config_args before parsing
  auto add_config = [&config_path](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key=value defaults file");
  };

  std::string validate_path;
  auto* validate = app.add_subcommand("validate-taxonomy", "Check a taxonomy file");
  validate->add_option("--taxonomy", validate_path, "taxonomy edge file")->required();
  add_config(validate);

  AggregateSettings agg;
  auto* aggregate = app.add_subcommand("aggregate", "Aggregate score sheets into label paths");
  aggregate->add_option("--taxonomy", agg.taxonomy_path)->required();
  aggregate->add_option("--sheets", agg.sheets_path)->required();
  aggregate->add_option("--method", agg.method)->check(CLI::IsMember({"heuristic", "graphical"}));
  aggregate->add_option("--theta", agg.theta, "entropy stop threshold");
  aggregate->add_option("--entropy-mode", agg.entropy_mode)
      ->check(CLI::IsMember({"value", "distribution"}));
  aggregate->add_option("--tau", agg.tau, "marginal walk threshold");
  aggregate->add_option("--params", agg.params_path, "observation parameter file");
  aggregate->add_option("--entry-level", agg.entry_path, "entry-level class file");
  aggregate->add_option("--weights", agg.weights_path, "leaf prior weight file");
  aggregate->add_option("--out", agg.out_path, "record output ('-' for stdout)");
  aggregate->add_option("--pred-out", agg.pred_out, "terminal classes as instance/class pairs");
  aggregate->add_option("--threads", agg.threads)->check(CLI::PositiveNumber);
  aggregate->add_option("--treewidth-cap", agg.treewidth_cap);
  add_config(aggregate);

  FitSettings fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit observation models on labeled sheets");
  fit_cmd->add_option("--taxonomy", fit.taxonomy_path)->required();
  fit_cmd->add_option("--sheets", fit.sheets_path)->required();
  fit_cmd->add_option("--gold", fit.gold_path)->required();
  fit_cmd->add_option("--kind", fit.kind)->check(CLI::IsMember({"binormal", "discrete"}));
  fit_cmd->add_option("--sigma-floor", fit.sigma_floor);
  fit_cmd->add_option("--smoothing", fit.smoothing);
  fit_cmd->add_option("--out", fit.out_path);
  add_config(fit_cmd);

  EmSettings em;
  auto* em_cmd = app.add_subcommand("em", "Fit observation models without labels");
  em_cmd->add_option("--taxonomy", em.taxonomy_path)->required();
  em_cmd->add_option("--sheets", em.sheets_path)->required();
  em_cmd->add_option("--init", em.init_path, "starting parameter file");
  em_cmd->add_option("--gold", em.gold_path, "labels for a supervised starting point");
  em_cmd->add_option("--max-iters", em.max_iters);
  em_cmd->add_option("--tol", em.tol);
  em_cmd->add_option("--sigma-floor", em.sigma_floor);
  em_cmd->add_option("--smoothing", em.smoothing);
  em_cmd->add_option("--out", em.out_path);
  em_cmd->add_option("--soft-labels", em.soft_labels_path);
  em_cmd->add_option("--trace", em.trace_path);
  add_config(em_cmd);

  EvalSettings ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against gold labels");
  eval_cmd->add_option("--taxonomy", ev.taxonomy_path)->required();
  eval_cmd->add_option("--pred", ev.pred_path)->required();
  eval_cmd->add_option("--gold", ev.gold_path)->required();
  eval_cmd->add_option("--out", ev.out_path);
  add_config(eval_cmd);

  SimulateSettings sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic ensemble");
  sim_cmd->add_option("--seed", sim.seed);
  sim_cmd->add_option("--out-dir", sim.out_dir)->required();
  sim_cmd->add_option("--depth", sim.cfg.depth);
  sim_cmd->add_option("--branch-min", sim.cfg.branch_min);
  sim_cmd->add_option("--branch-max", sim.cfg.branch_max);
  sim_cmd->add_option("--extra-parent-prob", sim.cfg.extra_parent_prob);
  sim_cmd->add_option("--classifiers", sim.cfg.num_classifiers);
  sim_cmd->add_option("--classes-per-classifier", sim.cfg.classes_per_classifier);
  sim_cmd->add_option("--instances", sim.cfg.num_instances);
  sim_cmd->add_option("--mu0", sim.cfg.true_model.mu_off);
  sim_cmd->add_option("--sigma0", sim.cfg.true_model.sigma_off);
  sim_cmd->add_option("--mu1", sim.cfg.true_model.mu_on);
  sim_cmd->add_option("--sigma1", sim.cfg.true_model.sigma_on);
  add_config(sim_cmd);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config_args(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const taxagg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  }

  try {
    if (*validate) return run_validate(validate_path);
    if (*aggregate) return run_aggregate(agg);
    if (*fit_cmd) return run_fit(fit);
    if (*em_cmd) return run_em(em);
    if (*eval_cmd) return run_evaluate(ev);
    if (*sim_cmd) return run_simulate(sim);
  } catch (const taxagg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
