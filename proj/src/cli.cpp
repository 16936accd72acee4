#include "relumip/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "relumip/adversarial.hpp"
#include "relumip/errors.hpp"
#include "relumip/fixtures.hpp"
#include "relumip/json_util.hpp"
#include "relumip/training.hpp"

namespace relumip {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return kExitOk;
    case SolveStatus::Infeasible:
      return kExitInfeasible;
    case SolveStatus::Feasible:
      return kExitLimitIncumbent;
    case SolveStatus::LimitNoIncumbent:
      return kExitLimitNoIncumbent;
    case SolveStatus::Unbounded:
      return kExitError;
  }
  return kExitError;
}

struct FormulationFlags {
  std::string formulation = "bigm";
  std::string method = "bunel";
  bool vi = false;
  int K = 1;
  std::string partition_bounds = "interval";
  bool no_simplify = false;

  void add(CLI::App* app) {
    app->add_option("--formulation", formulation, "bigm|extended|disjunctive|hullcuts")->capture_default_str();
    app->add_option("--method", method, "bound method: bunel|cheng|tjeng|serra")->capture_default_str();
    app->add_flag("--vi", vi, "add valid inequalities (extended)");
    app->add_option("--K", K, "partitions per unit (disjunctive)")->capture_default_str();
    app->add_option("--partition-bounds", partition_bounds, "interval|lp")->capture_default_str();
    app->add_flag("--no-simplify", no_simplify, "keep indicators on stable units");
  }

  FormulationSpec spec() const {
    FormulationSpec s;
    s.relu = parse_formulation(formulation);
    s.bound_method = parse_bound_method(method);
    s.valid_inequalities = vi;
    s.partitions = K;
    if (partition_bounds == "interval")
      s.partition_bounds = PartitionBounds::Interval;
    else if (partition_bounds == "lp")
      s.partition_bounds = PartitionBounds::Lp;
    else
      throw ModelError("unknown partition bounds '" + partition_bounds + "'");
    s.simplify_stable = !no_simplify;
    s.validate();
    return s;
  }
};

struct SolverFlags {
  double time_limit = kInf;
  double gap = 1e-6;
  std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();
  std::uint64_t seed = 0;
  bool with_time = false;

  void add(CLI::App* app) {
    app->add_option("--time-limit", time_limit, "seconds");
    app->add_option("--gap", gap, "relative gap tolerance")->capture_default_str();
    app->add_option("--node-limit", node_limit, "branch-and-bound node limit");
    app->add_option("--seed", seed, "solver seed")->capture_default_str();
    app->add_flag("--with-time", with_time, "include wall time in result documents");
  }

  SolverParams params() const {
    SolverParams p;
    p.time_limit = time_limit;
    p.gap_tolerance = gap;
    p.node_limit = node_limit;
    p.seed = seed;
    return p;
  }
};

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    write_text_file(path, text);
}

std::vector<double> load_vector(const std::string& path) {
  const json doc = parse_json(read_text_file(path), "input vector");
  try {
    if (doc.is_array()) return doc.get<std::vector<double>>();
    if (doc.is_object() && doc.contains("reference")) return doc["reference"].get<std::vector<double>>();
    if (doc.is_object() && doc.contains("input")) return doc["input"].get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("input vector: ") + e.what());
  }
  throw ParseError("input vector: expected an array or an object with 'input'");
}

std::vector<std::size_t> parse_arch(const std::string& s) {
  std::vector<std::size_t> arch;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
      arch.push_back(std::size_t(v));
    } catch (const std::exception&) {
      throw ModelError("bad architecture entry '" + tok + "'");
    }
  }
  return arch;
}

std::string fmt(double v, const char* spec = "%.6g") {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  std::string s = buf;
  // Tiny negatives print as "-0.000000"; drop the sign.
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

/// One row per result document, sorted by file name.
std::string results_table(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("results directory '" + dir.string() + "' not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::vector<std::vector<std::string>> rows{
      {"formulation", "status", "optimal", "bound", "gap", "LP", "nodes", "cuts", "time (s)"}};
  for (const auto& f : files) {
    const json doc = parse_json(read_text_file(f), f.string());
    const SolveResult r = solve_result_from_json(doc);
    rows.push_back({r.label.empty() ? f.stem().string() : r.label, status_name(r.status), fmt(r.objective, "%.6f"),
                    fmt(r.bound, "%.6f"), fmt(r.gap), r.lp_relaxation ? fmt(*r.lp_relaxation, "%.6f") : "-",
                    std::to_string(r.nodes), std::to_string(r.cuts),
                    doc.contains("time") ? fmt(r.time_seconds, "%.3f") : "-"});
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::string text;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      text += c == 0 ? "" : "  ";
      text += rows[r][c] + std::string(width[c] - rows[r][c].size(), ' ');
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    text += "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w;
      text += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    }
  }
  return text;
}

void write_fixtures(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  auto spec_doc = [](const AttackSpec& s) {
    json j{{"reference", s.reference}, {"true_class", s.true_class}, {"margin", s.margin}};
    if (s.target) j["target"] = *s.target;
    return j.dump(2) + "\n";
  };
  for (std::uint64_t seed : kSmallNetSeeds) {
    const AttackFixture f = small_attack_fixture(seed);
    const std::string stem = "small_" + std::to_string(seed);
    save_network(f.net, dir / (stem + ".net.json"));
    write_text_file(dir / (stem + ".attack.json"), spec_doc(f.spec));
  }
  const AttackFixture large = large_attack_fixture();
  save_network(large.net, dir / "large.net.json");
  write_text_file(dir / "large.attack.json", spec_doc(large.spec));
  save_network(tightening_fixture(), dir / "tightening.net.json");
  save_dataset(xor4(), dir / "xor4.data.json");
  save_dataset(random_separable(kSeparableSeed, 20, 2), dir / "separable.data.json");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"relumip: MIP encodings of trained ReLU networks"};
  app.require_subcommand(1);

  // bounds
  std::string net_path, bounds_path, out_path, method = "bunel";
  bool exact_mip = false;
  auto* bounds_cmd = app.add_subcommand("bounds", "compute neuron bounds");
  bounds_cmd->add_option("--net", net_path, "network file")->required();
  bounds_cmd->add_option("--method", method, "bunel|cheng|tjeng|serra")->capture_default_str();
  bounds_cmd->add_flag("--exact-mip", exact_mip, "tjeng: solve prefix MIPs instead of LPs");
  bounds_cmd->add_option("--out", out_path, "output file (default stdout)");

  // encode
  FormulationFlags form;
  std::string format = "mps", attack_path;
  int objective_output = -1;
  bool maximize = false;
  auto* encode_cmd = app.add_subcommand("encode", "write a MIP model of a network");
  encode_cmd->add_option("--net", net_path, "network file")->required();
  encode_cmd->add_option("--bounds", bounds_path, "bounds file (default: computed with --method)");
  form.add(encode_cmd);
  encode_cmd->add_option("--format", format, "mps|lp")->capture_default_str();
  encode_cmd->add_option("--objective-output", objective_output, "optimize this output unit");
  encode_cmd->add_flag("--maximize", maximize, "maximize instead of minimize");
  encode_cmd->add_option("--attack", attack_path, "attack spec file: adds margin rows and the L1 objective");
  encode_cmd->add_option("--out", out_path, "output file (default stdout)");

  // solve
  SolverFlags solver;
  std::string model_path, label;
  auto* solve_cmd = app.add_subcommand("solve", "solve an MPS model");
  solve_cmd->add_option("--model", model_path, "MPS file")->required();
  solver.add(solve_cmd);
  solve_cmd->add_option("--label", label, "label stored in the result document");
  solve_cmd->add_option("--out", out_path, "result file (default stdout)");

  // attack
  std::string input_path, spec_path, report_path, result_path;
  int true_digit = -1, target = -1;
  double margin = 1.2;
  auto* attack_cmd = app.add_subcommand("attack", "minimal L1 perturbation reaching a target class");
  attack_cmd->add_option("--net", net_path, "network file")->required();
  attack_cmd->add_option("--input", input_path, "reference input file");
  attack_cmd->add_option("--spec", spec_path, "attack spec file (alternative to --input/--true-digit)");
  attack_cmd->add_option("--true-digit", true_digit, "true class of the reference");
  attack_cmd->add_option("--target", target, "target class (default (true + 5) mod 10)");
  attack_cmd->add_option("--margin", margin, "margin factor")->capture_default_str();
  form.add(attack_cmd);
  solver.add(attack_cmd);
  attack_cmd->add_option("--out", out_path, "perturbed input and report (default stdout)");
  attack_cmd->add_option("--result", result_path, "also write the solve result document");

  // train
  std::string data_path, arch_str, variant = "binary", loss = "l1";
  int P = 1;
  double epsilon = 1e-4, radius = 1.0;
  auto* train_cmd = app.add_subcommand("train", "train a binary or binarized network by MIP");
  train_cmd->add_option("--data", data_path, "dataset file")->required();
  train_cmd->add_option("--arch", arch_str, "layer sizes, e.g. 2,2,1")->required();
  train_cmd->add_option("--variant", variant, "binary|bnn")->capture_default_str();
  train_cmd->add_option("--P", P, "binarized weight scale")->capture_default_str();
  train_cmd->add_option("--loss", loss, "l1|hinge")->capture_default_str();
  train_cmd->add_option("--epsilon", epsilon, "strictness epsilon")->capture_default_str();
  train_cmd->add_option("--radius", radius, "binary input radius")->capture_default_str();
  solver.add(train_cmd);
  train_cmd->add_option("--out", out_path, "decoded network file (default stdout)");
  train_cmd->add_option("--report", report_path, "training report file");
  train_cmd->add_option("--result", result_path, "also write the solve result document");

  // fixtures
  std::string out_dir;
  auto* fixtures_cmd = app.add_subcommand("fixtures", "write the seeded fixture networks and datasets");
  fixtures_cmd->add_option("--out-dir", out_dir, "directory")->required();

  // report
  std::string results_dir;
  auto* report_cmd = app.add_subcommand("report", "comparison table over solve result documents");
  report_cmd->add_option("--results", results_dir, "directory of result documents")->required();
  report_cmd->add_option("--out", out_path, "table file (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (bounds_cmd->parsed()) {
      const Network net = load_network(net_path);
      TjengOptions opts;
      opts.exact_mip = exact_mip;
      emit(out_path, bounds_to_string(compute_bounds(net, parse_bound_method(method), opts)), out);
      return kExitOk;
    }

    if (encode_cmd->parsed()) {
      const Network net = load_network(net_path);
      FormulationSpec spec = form.spec();
      const BoundSet bounds = bounds_path.empty() ? compute_bounds(net, spec.bound_method) : load_bounds(bounds_path);
      spec.bound_method = bounds.method;
      Encoding enc;
      if (!attack_path.empty()) {
        const AttackSpec as = load_attack_spec(attack_path);
        enc = build_attack(encode_network(net, bounds, spec, as.logits(net)), net, as);
      } else {
        enc = encode_network(net, bounds, spec);
        if (objective_output >= 0) {
          const auto& outs = enc.outputs.back();
          if (std::size_t(objective_output) >= outs.size()) throw ModelError("objective output out of range");
          enc.model.set_objective(maximize ? ObjSense::Maximize : ObjSense::Minimize,
                                  {{outs[std::size_t(objective_output)], 1.0}});
        }
      }
      if (format == "mps")
        emit(out_path, export_mps(enc.model), out);
      else if (format == "lp")
        emit(out_path, export_lp(enc.model), out);
      else
        throw ModelError("unknown format '" + format + "'");
      return kExitOk;
    }

    if (solve_cmd->parsed()) {
      const MipModel model = parse_mps(read_text_file(model_path));
      SolveResult r = solve_mip(model, solver.params());
      r.label = label;
      emit(out_path, solve_result_to_string(r, &model, !solver.with_time), out);
      return exit_code(r.status);
    }

    if (attack_cmd->parsed()) {
      const Network net = load_network(net_path);
      AttackSpec as;
      if (!spec_path.empty()) {
        as = load_attack_spec(spec_path);
      } else {
        if (input_path.empty() || true_digit < 0) {
          err << "error: attack needs --spec, or --input with --true-digit\n";
          return kExitUsage;
        }
        as.reference = load_vector(input_path);
        as.true_class = std::size_t(true_digit);
        as.margin = margin;
      }
      if (true_digit >= 0) as.true_class = std::size_t(true_digit);
      if (target >= 0) as.target = std::size_t(target);
      if (attack_cmd->count("--margin")) as.margin = margin;
      const FormulationSpec spec = form.spec();
      AttackRun run = run_attack(net, as, spec, solver.params());
      run.result.label = formulation_name(spec.relu);
      if (!result_path.empty())
        write_text_file(result_path, solve_result_to_string(run.result, &run.encoding.model, !solver.with_time));
      if (run.report) {
        json doc = json::parse(attack_report_to_string(*run.report, run.perturbed));
        doc["status"] = status_name(run.result.status);
        doc["objective"] = run.result.objective;
        emit(out_path, doc.dump(2) + "\n", out);
      } else {
        emit(out_path, json{{"status", status_name(run.result.status)}, {"target", as.target_class()}}.dump(2) + "\n",
             out);
      }
      return exit_code(run.result.status);
    }

    if (train_cmd->parsed()) {
      TrainingSpec ts;
      ts.arch = parse_arch(arch_str);
      ts.data = load_dataset(data_path);
      if (variant == "binary")
        ts.variant = TrainingVariant::BinaryStep;
      else if (variant == "bnn")
        ts.variant = TrainingVariant::Binarized;
      else
        throw ModelError("unknown variant '" + variant + "'");
      ts.P = P;
      ts.loss = parse_loss(loss);
      ts.epsilon = epsilon;
      ts.radius = radius;
      const MipModel model = encode_training(ts);
      const SolveResult r = solve_mip(model, solver.params());
      if (!result_path.empty()) write_text_file(result_path, solve_result_to_string(r, &model, !solver.with_time));
      if (r.has_incumbent()) {
        const TrainedNetwork t = decode_trained(ts, model, r);
        emit(out_path, network_to_string(t.net), out);
        if (!report_path.empty()) write_text_file(report_path, training_report_to_string(t.report));
      }
      return exit_code(r.status);
    }

    if (fixtures_cmd->parsed()) {
      write_fixtures(out_dir);
      return kExitOk;
    }

    if (report_cmd->parsed()) {
      emit(out_path, results_table(results_dir), out);
      return kExitOk;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace relumip
