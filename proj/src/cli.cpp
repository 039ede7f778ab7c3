#include "storebound/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "storebound/csv.hpp"
#include "storebound/graph.hpp"
#include "storebound/neigh_dom.hpp"
#include "storebound/source_model.hpp"
#include "storebound/sw_coding.hpp"
#include "storebound/undersample.hpp"

namespace storebound {

namespace {

namespace fs = std::filesystem;

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Reads a flat JSON object as a CLI11 config file. Arrays become repeated
// inputs; booleans become "true"/"false". Keys are attached to whichever
// subcommand was selected on the command line.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json doc;
    try {
      input >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
      throw CLI::ConversionError("config must be a JSON object");
    }
    std::vector<std::string> parents;
    const auto selected = root_->get_subcommands();
    if (!selected.empty()) parents.push_back(selected.front()->get_name());
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : doc.items()) {
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return format_double(v.get<double>());
    return v.dump();
  }

  const CLI::App* root_;
};

struct CommonOptions {
  std::uint64_t seed = 0;
  bool random_seed = false;
  std::string out_dir;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* sub, CommonOptions& common) {
  common.seed_opt = sub->add_option("--seed", common.seed, "Master random seed");
  sub->add_flag("--random-seed", common.random_seed,
                "Draw a seed from the system and log it");
  sub->add_option("--out-dir", common.out_dir, "Directory for output files");
}

std::uint64_t resolve_seed(const CommonOptions& common, std::ostream& err) {
  if (common.seed_opt->count() > 0) return common.seed;
  if (common.random_seed) {
    std::random_device rd;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    err << "using random seed " << seed << '\n';
    return seed;
  }
  throw ValidationError("this command is randomized: pass --seed or --random-seed");
}

fs::path require_out_dir(const CommonOptions& common) {
  if (common.out_dir.empty()) throw ValidationError("--out-dir is required");
  fs::path dir(common.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

// sw-sweep -------------------------------------------------------------------

struct SweepCommand {
  CommonOptions common;
  std::string family_path;
  std::size_t n = 0;
  double epsilon = 0.05;
  std::vector<double> rates;
  std::uint64_t trials = 100000;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
  std::uint64_t exact_cap = kDefaultEnumerationCap;
  std::optional<double> encoder_rate;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("sw-sweep", "Rate sweep of Y-dependent encoders");
    add_common(sub, common);
    sub->add_option("--family", family_path, "Source family JSON")->required();
    sub->add_option("--n", n, "Block length (cycles the family components)");
    sub->add_option("--epsilon", epsilon, "Typicality slack");
    sub->add_option("--rates", rates, "Rate grid")->delimiter(',');
    sub->add_option("--trials", trials, "Monte Carlo trials beyond the exact cap");
    sub->add_option("--enum-cap", enumeration_cap, "Enumeration cap for construction");
    sub->add_option("--exact-cap", exact_cap, "Joint-outcome cap for exact errors");
    sub->add_option("--encoder-rate", encoder_rate, "Also write encoder.json at this rate");
    sub->callback([this]() { selected = true; });
  }

  int run(std::ostream& out, std::ostream& err) {
    require(!rates.empty(), "--rates must list at least one rate");
    require(epsilon > 0.0, "--epsilon must be positive");
    for (double r : rates) require(r > 0.0 && r <= 1.0, "rates must lie in (0, 1]");
    const fs::path dir = require_out_dir(common);
    const SourceFamily family = load_family(family_path, n);
    for (const auto& w : family.warnings()) err << "warning: " << w << '\n';

    SweepOptions options;
    options.enumeration_cap = enumeration_cap;
    options.exact_cap = exact_cap;
    options.trials = trials;
    if (sweep_needs_sampling(family, options)) options.seed = resolve_seed(common, err);

    const auto rows = threshold_sweep(family, epsilon, rates, options);
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    write_text(dir / "sweep.csv", csv.str());

    const EntropyProfile profile = entropy_profile(family);
    nlohmann::json summary;
    summary["n"] = family.length();
    summary["epsilon"] = epsilon;
    summary["h_xy"] = profile.avg_hxy;
    summary["h_y"] = profile.avg_hy;
    summary["h_x"] = profile.avg_hx;
    summary["threshold"] = profile.avg_hxy - profile.avg_hy;
    if (profile.avg_hx > 0.0) summary["storage_savings"] = storage_savings(profile);
    summary["rows"] = rows.size();
    summary["exact"] = rows.front().exact;
    write_json(dir / "sweep_summary.json", summary);

    if (encoder_rate) {
      const auto encoder = construct_achievability_encoder(family, epsilon,
                                                           *encoder_rate,
                                                           enumeration_cap);
      write_json(dir / "encoder.json", encoder.to_json());
    }
    out << "threshold H_XY - H_Y = " << format_double(summary["threshold"].get<double>())
        << " bits; wrote " << rows.size() << " rows to " << (dir / "sweep.csv").string()
        << '\n';
    return kExitSuccess;
  }

  bool selected = false;
};

// dom-find -------------------------------------------------------------------

struct DomFindCommand {
  CommonOptions common;
  std::string graph_path;
  std::size_t gnp_n = 0;
  double gnp_p = -1.0;
  double theta = 0.0;
  double eta = 0.1;
  std::uint64_t max_rounds = 0;
  bool exact = false;
  bool selected = false;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("dom-find", "Construct a theta-neighbourhood dominating set");
    add_common(sub, common);
    sub->add_option("--graph", graph_path, "Edge-list file");
    sub->add_option("--gnp-n", gnp_n, "Generate G(n, p) with this n");
    sub->add_option("--gnp-p", gnp_p, "Edge probability for G(n, p)");
    sub->add_option("--theta", theta, "Neighbourhood fraction")->required();
    sub->add_option("--eta", eta, "Selection slack (keep probability theta + eta)");
    sub->add_option("--max-rounds", max_rounds, "Resampling cap (0: 1000 n)");
    sub->add_flag("--exact", exact, "Also compute the exact minimum (n <= 20)");
    sub->callback([this]() { selected = true; });
  }

  int run(std::ostream& out, std::ostream& err) {
    require(theta > 0.0 && theta <= 1.0, "--theta must lie in (0, 1]");
    require(eta > 0.0, "--eta must be positive");
    require(theta + eta <= 1.0 + kThresholdTolerance, "theta + eta must not exceed 1");
    const bool from_file = !graph_path.empty();
    require(from_file != (gnp_n > 0), "pass exactly one of --graph or --gnp-n/--gnp-p");
    if (!from_file) require(gnp_p >= 0.0 && gnp_p <= 1.0, "--gnp-p must lie in [0, 1]");
    const fs::path dir = require_out_dir(common);
    const std::uint64_t seed = resolve_seed(common, err);

    const Graph g = from_file ? load_edge_list(graph_path)
                              : gen_gnp(gnp_n, gnp_p, derive_seed(seed, 0));
    const LllOutcome lll = lll_construct(g, theta, eta, derive_seed(seed, 1), max_rounds);
    for (const auto& w : lll.warnings) err << "warning: " << w << '\n';
    const DominationCertificate cert = greedy_shrink(g, theta, lll.certificate.set);
    const DegreeStats stats = degree_stats(g);

    nlohmann::json doc = cert.to_json();
    doc["lll_size"] = lll.certificate.size();
    doc["resamplings"] = lll.resamplings;
    doc["size_bound"] = lll.size_bound;
    doc["sufficient_condition"] = lll.sufficient_condition;
    doc["min_degree"] = stats.min_degree;
    doc["max_degree"] = stats.max_degree;
    const LowerBound lb = lower_bound_certificate(g, theta);
    doc["lower_bound"] = lb.value();
    doc["lower_bound_closed_form"] = lb.closed_form;
    if (exact) {
      require(g.vertex_count() <= kBruteForceMaxVertices,
              "--exact needs at most 20 vertices");
      doc["exact_minimum"] = brute_force_min(g, theta).minimum;
    }
    write_json(dir / "certificate.json", doc);
    if (!from_file) save_edge_list((dir / "graph.txt").string(), g);

    out << "size " << cert.size() << " (before shrink " << lll.certificate.size()
        << "), bound (theta + 2 eta) n = " << format_double(lll.size_bound)
        << ", feasible " << (cert.feasible ? "yes" : "no")
        << ", sufficient condition " << (lll.sufficient_condition ? "holds" : "fails")
        << '\n';
    return kExitSuccess;
  }
};

// dom-experiment -------------------------------------------------------------

struct DomExperimentCommand {
  CommonOptions common;
  ExperimentConfig config;
  bool selected = false;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("dom-experiment", "Concentration experiment on G(n, p)");
    add_common(sub, common);
    sub->add_option("--n", config.n, "Vertices")->required();
    sub->add_option("--p", config.p, "Edge probability")->required();
    sub->add_option("--theta", config.theta, "Neighbourhood fraction")->required();
    sub->add_option("--eta", config.eta, "Selection slack")->required();
    sub->add_option("--zeta", config.zeta, "Random-subset fraction (< theta)")->required();
    sub->add_option("--trials", config.trials, "Number of trials")->required();
    sub->add_option("--subset-probes", config.subset_probes, "Random subsets per trial");
    sub->add_option("--max-rounds", config.max_rounds, "Resampling cap (0: 1000 n)");
    sub->callback([this]() { selected = true; });
  }

  int run(std::ostream& out, std::ostream& err) {
    const fs::path dir = require_out_dir(common);
    require(config.n >= 1, "--n must be positive");
    require(config.p >= 0.0 && config.p <= 1.0, "--p must lie in [0, 1]");
    require(config.theta > 0.0 && config.theta <= 1.0, "--theta must lie in (0, 1]");
    require(config.eta > 0.0 && config.theta + config.eta <= 1.0 + kThresholdTolerance,
            "--eta must be positive with theta + eta <= 1");
    require(config.zeta > 0.0 && config.zeta < config.theta, "need 0 < zeta < theta");
    config.seed = resolve_seed(common, err);

    const ConcentrationReport report = concentration_experiment(config);
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    std::ostringstream csv;
    write_concentration_csv(csv, report);
    write_text(dir / "trials.csv", csv.str());
    write_json(dir / "summary.json", concentration_summary_json(report));
    out << report.trials.size() << " trials; feasible fraction "
        << format_double(report.fraction_feasible) << ", within (theta + 2 eta) n "
        << format_double(report.fraction_within_bound)
        << ", random floor(zeta n)-subsets infeasible "
        << format_double(report.random_subset_infeasible_rate) << '\n';
    return kExitSuccess;
  }
};

// undersample ----------------------------------------------------------------

struct UndersampleCommand {
  CommonOptions common;
  std::string input;
  std::string label_column = "label";
  double theta = 0.0;
  double eta = 0.1;
  std::size_t k = 0;
  double m = 3.0;
  std::string metric = "euclidean";
  std::string evaluate_path;
  std::size_t k_eval = 5;
  std::uint64_t max_rounds = 0;
  bool selected = false;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("undersample", "Neighbourhood-preserving majority undersampling");
    add_common(sub, common);
    sub->add_option("--input", input, "Headered CSV dataset")->required();
    sub->add_option("--label-column", label_column, "Name of the label column");
    sub->add_option("--theta", theta, "Fraction of k nearest neighbours to retain")->required();
    sub->add_option("--eta", eta, "Selection slack");
    sub->add_option("--k", k, "Neighbours per point (default: ceil(M log2 n))");
    sub->add_option("--M", m, "Constant in k = M log2 n");
    sub->add_option("--metric", metric, "euclidean, manhattan or cosine");
    sub->add_option("--evaluate", evaluate_path, "Holdout CSV for kNN evaluation");
    sub->add_option("--k-eval", k_eval, "k for the evaluation classifier");
    sub->add_option("--max-rounds", max_rounds, "Resampling cap (0: 1000 n)");
    sub->callback([this]() { selected = true; });
  }

  int run(std::ostream& out, std::ostream& err) {
    require(theta > 0.0 && theta < 1.0, "--theta must lie in (0, 1)");
    require(eta > 0.0 && theta + eta <= 1.0 + kThresholdTolerance,
            "--eta must be positive with theta + eta <= 1");
    require(m > 0.0, "--M must be positive");
    const Metric parsed_metric = parse_metric(metric);
    const fs::path dir = require_out_dir(common);
    const std::uint64_t seed = resolve_seed(common, err);

    const Dataset data = load_dataset(input, label_column);
    const std::size_t majority = data.class_counts().at(data.majority_label());
    const std::size_t kk = k > 0 ? k : choose_k(majority, m);
    const UndersampleResult result =
        undersample_majority(data, theta, kk, eta, seed, parsed_metric, max_rounds);
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';

    std::ostringstream subset;
    subset << "row\n";
    for (auto r : result.retained_rows) subset << r << '\n';
    write_text(dir / "subset.csv", subset.str());

    nlohmann::json cert = result.certificate.to_json();
    cert["k"] = kk;
    cert["metric"] = metric_name(parsed_metric);
    cert["majority_label"] = result.majority_label;
    cert["majority_size"] = result.majority_rows.size();
    cert["lll_size"] = result.lll_size;
    cert["resamplings"] = result.resamplings;
    cert["size_bound"] = result.size_bound;
    cert["min_retention"] = result.min_retention;
    cert["retained_rows"] = result.retained_rows;
    write_json(dir / "certificate.json", cert);

    const Dataset balanced = data.subset(result.balanced_rows(data));
    save_dataset((dir / "undersampled.csv").string(), balanced);

    if (!evaluate_path.empty()) {
      const Dataset holdout = load_dataset(evaluate_path, label_column);
      write_json(dir / "evaluation.json",
                 evaluate_knn_classifier(balanced, holdout, k_eval, parsed_metric).to_json());
      write_json(dir / "evaluation_full.json",
                 evaluate_knn_classifier(data, holdout, k_eval, parsed_metric).to_json());
    }
    out << "retained " << result.retained_rows.size() << " of "
        << result.majority_rows.size() << " majority points (k = " << kk
        << ", bound " << format_double(result.size_bound) << "), feasible "
        << (result.certificate.feasible ? "yes" : "no") << '\n';
    return kExitSuccess;
  }
};

// evaluate -------------------------------------------------------------------

struct EvaluateCommand {
  CommonOptions common;
  std::string train_path;
  std::string test_path;
  std::string label_column = "label";
  std::size_t k_eval = 5;
  std::string metric = "euclidean";
  bool selected = false;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("evaluate", "Per-class recall of a kNN classifier");
    add_common(sub, common);
    sub->add_option("--train", train_path, "Training CSV")->required();
    sub->add_option("--test", test_path, "Test CSV")->required();
    sub->add_option("--label-column", label_column, "Name of the label column");
    sub->add_option("--k-eval", k_eval, "Number of neighbours");
    sub->add_option("--metric", metric, "euclidean, manhattan or cosine");
    sub->callback([this]() { selected = true; });
  }

  int run(std::ostream& out, std::ostream&) {
    const Metric parsed_metric = parse_metric(metric);
    const fs::path dir = require_out_dir(common);
    const Dataset train = load_dataset(train_path, label_column);
    const Dataset test = load_dataset(test_path, label_column);
    const ClassifierReport report =
        evaluate_knn_classifier(train, test, k_eval, parsed_metric);
    write_json(dir / "evaluation.json", report.to_json());
    out << "accuracy " << format_double(report.accuracy) << '\n';
    return kExitSuccess;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bounds for dependent encoding and neighbourhood-domination undersampling",
               "storebound"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "JSON config file of subcommand options; flags take precedence");
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::error);
  SweepCommand sweep;
  DomFindCommand dom_find;
  DomExperimentCommand dom_experiment;
  UndersampleCommand undersample;
  EvaluateCommand evaluate;
  sweep.attach(app);
  dom_find.attach(app);
  dom_experiment.attach(app);
  undersample.attach(app);
  evaluate.attach(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitSuccess : kExitValidation;
  }

  try {
    if (sweep.selected) return sweep.run(out, err);
    if (dom_find.selected) return dom_find.run(out, err);
    if (dom_experiment.selected) return dom_experiment.run(out, err);
    if (undersample.selected) return undersample.run(out, err);
    if (evaluate.selected) return evaluate.run(out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const EnumerationTooLarge& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace storebound
