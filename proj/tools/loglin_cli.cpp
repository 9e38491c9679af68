// Command-line front end: model/table/hyperparameter file handling, parameter
// transforms, prior construction and properness checks, posterior updates,
// evidence, Bayes factors, prior-moment elicitation, and F-matrix dumps.
//
// Every command prints a run report (JSON) to stdout and optionally to
// --report; reports carry digests of every input file and the canonical model
// hash.  Exit codes: 0 success, 1 usage or parse failure, 2 domain error,
// 3 numerical failure (or instability warning under --strict).

#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loglin/loglin.hpp"

namespace {

using loglin::json;

// ---------------------------------------------------------------------------
// Run report
// ---------------------------------------------------------------------------

struct run_report {
  json j;
  std::vector<std::string> warnings;

  explicit run_report(const std::string& command) {
    j["command"] = command;
    j["inputs"] = json::object();
    j["diagnostics"] = json::array();
  }

  void add_input(const std::string& path) {
    j["inputs"][path] = loglin::fnv1a_hex(loglin::read_text_file(path));
  }
  void warn(const std::string& message) { warnings.push_back(message); }

  // Emits the report; returns 3 instead of 0 when warnings were raised and
  // --strict escalation is on.
  int emit(const std::string& report_path, bool strict, int exit_code = 0) {
    for (const std::string& w : warnings) j["diagnostics"].push_back(w);
    std::string text = j.dump(2) + "\n";
    std::cout << text;
    if (!report_path.empty()) loglin::write_text_file(report_path, text);
    if (exit_code == 0 && strict && !warnings.empty()) return 3;
    return exit_code;
  }
};

loglin::model load_model_into(run_report& report, const std::string& path,
                              const char* hash_key = "model_hash") {
  report.add_input(path);
  loglin::model m = loglin::load_model(path);
  report.j[hash_key] = loglin::model_hash(m);
  return m;
}

loglin::hyperparameters load_hyper(run_report& report, const loglin::model& m,
                                   const std::string& path) {
  report.add_input(path);
  json j;
  try {
    j = json::parse(loglin::read_text_file(path));
  } catch (const json::exception& e) {
    throw loglin::parse_error(std::string("malformed JSON in ") + path + ": " + e.what());
  }
  return loglin::hyper_from_json(m, j);
}

json parse_json_file(run_report& report, const std::string& path) {
  report.add_input(path);
  try {
    return json::parse(loglin::read_text_file(path));
  } catch (const json::exception& e) {
    throw loglin::parse_error(std::string("malformed JSON in ") + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Shared estimation flags
// ---------------------------------------------------------------------------

struct estimate_flags {
  std::string method = "auto";
  bool closed_form = false;
  std::uint64_t seed = 1;
  std::int64_t draws = 100000;

  void attach(CLI::App* cmd) {
    cmd->add_option("--method", method, "Evidence method")
        ->check(CLI::IsMember({"auto", "closed", "laplace", "is"}))
        ->capture_default_str();
    cmd->add_flag("--closed-form", closed_form, "Shorthand for --method closed");
    cmd->add_option("--seed", seed, "Random seed for importance sampling")
        ->capture_default_str();
    cmd->add_option("--draws", draws, "Importance-sampling draw count")
        ->capture_default_str();
  }

  loglin::evidence_policy policy() const {
    loglin::evidence_policy pol;
    std::string name = closed_form ? "closed" : method;
    if (name == "auto") pol.method = loglin::evidence_policy::kind::automatic;
    else if (name == "closed") pol.method = loglin::evidence_policy::kind::closed;
    else if (name == "laplace") pol.method = loglin::evidence_policy::kind::laplace;
    else pol.method = loglin::evidence_policy::kind::importance;
    pol.seed = seed;
    pol.draws = draws;
    return pol;
  }
};

void note_instability(run_report& report, const loglin::evidence_result& r) {
  if (r.unstable)
    report.warn("importance sampling unstable: effective sample size below 1% of draws");
}

// ---------------------------------------------------------------------------
// transform
// ---------------------------------------------------------------------------

int cmd_transform(const std::string& model_path, const std::string& input_path,
                  const std::string& direction, const std::string& output_path,
                  const std::string& report_path, bool strict) {
  run_report report("transform");
  loglin::model m = load_model_into(report, model_path);
  json in = parse_json_file(report, input_path);

  std::string kind;
  try {
    kind = in.at("kind").get<std::string>();
  } catch (const json::exception&) {
    throw loglin::parse_error("input file lacks a 'kind' field");
  }
  if (kind != "theta" && kind != "free_prob")
    throw loglin::parse_error("input kind must be 'theta' or 'free_prob'");
  if (!direction.empty()) {
    if (direction == "to-p" && kind != "theta")
      throw loglin::parse_error("--direction to-p needs a theta input");
    if (direction == "to-theta" && kind != "free_prob")
      throw loglin::parse_error("--direction to-theta needs a free_prob input");
  }

  json out;
  double residual = 0.0;
  if (kind == "theta") {
    loglin::theta_vector theta = loglin::theta_from_json(m, in);
    loglin::free_prob_vector fp = loglin::free_from_theta(m, theta);
    loglin::theta_vector back = loglin::theta_from_free(m, fp);
    for (std::size_t i = 0; i < theta.size(); ++i)
      residual = std::max(residual, std::abs(back.v[i] - theta.v[i]));
    out = loglin::free_prob_to_json(m, fp);
    report.j["outputs"]["direction"] = "theta_to_free_prob";
  } else {
    loglin::free_prob_vector fp = loglin::free_prob_from_json(m, in);
    loglin::complete_cells(m, fp);  // validates interiority and normalization
    loglin::theta_vector theta = loglin::theta_from_free(m, fp);
    loglin::free_prob_vector back = loglin::free_from_theta(m, theta);
    residual = std::abs(back.p_base - fp.p_base);
    for (std::size_t i = 0; i < fp.v.size(); ++i)
      residual = std::max(residual, std::abs(back.v[i] - fp.v[i]));
    out = loglin::theta_to_json(m, theta);
    report.j["outputs"]["direction"] = "free_prob_to_theta";
  }
  loglin::write_text_file(output_path, out.dump(2) + "\n");
  report.j["outputs"]["output_file"] = output_path;
  report.j["outputs"]["round_trip_residual"] = residual;
  return report.emit(report_path, strict);
}

// ---------------------------------------------------------------------------
// prior
// ---------------------------------------------------------------------------

json properness_to_json(const loglin::properness_report& rep) {
  json j{{"proper", rep.proper},
         {"gradient_residual", rep.gradient_residual},
         {"iterations", rep.iterations}};
  if (!rep.proper) j["reason"] = rep.reason;
  return j;
}

int write_hyper_output(run_report& report, const loglin::model& m,
                       const loglin::hyperparameters& h, const std::string& output_path,
                       const std::string& report_path, bool strict) {
  loglin::write_text_file(output_path, loglin::hyper_to_json(m, h).dump(2) + "\n");
  report.j["outputs"]["output_file"] = output_path;
  report.j["outputs"]["alpha"] = h.alpha;
  return report.emit(report_path, strict);
}

int cmd_prior_from_theta(const std::string& model_path, const std::string& theta_path,
                         double alpha, const std::string& output_path,
                         const std::string& report_path, bool strict) {
  run_report report("prior from-theta");
  loglin::model m = load_model_into(report, model_path);
  loglin::theta_vector theta = loglin::theta_from_json(m, parse_json_file(report, theta_path));
  loglin::hyperparameters h = loglin::construct_from_theta(m, theta, alpha);
  report.j["outputs"]["properness"] = properness_to_json(loglin::check_proper(m, h));
  return write_hyper_output(report, m, h, output_path, report_path, strict);
}

int cmd_prior_from_table(const std::string& model_path, const std::string& table_path,
                         const std::string& output_path, const std::string& report_path,
                         bool strict) {
  run_report report("prior from-table");
  loglin::model m = load_model_into(report, model_path);
  report.add_input(table_path);
  loglin::contingency_table table = loglin::load_table(m.space, table_path);
  loglin::hyperparameters h = loglin::construct_from_prior_table(m, table);
  return write_hyper_output(report, m, h, output_path, report_path, strict);
}

int cmd_prior_perks(const std::string& model_path, double total, const std::string& output_path,
                    const std::string& report_path, bool strict) {
  run_report report("prior perks");
  loglin::model m = load_model_into(report, model_path);
  loglin::hyperparameters h = loglin::perks_prior(m, total);
  return write_hyper_output(report, m, h, output_path, report_path, strict);
}

int cmd_prior_check(const std::string& model_path, const std::string& hyper_path,
                    const std::string& report_path, bool strict) {
  run_report report("prior check");
  loglin::model m = load_model_into(report, model_path);
  loglin::hyperparameters h = load_hyper(report, m, hyper_path);
  loglin::properness_report rep = loglin::check_proper(m, h);
  report.j["outputs"]["properness"] = properness_to_json(rep);
  if (rep.proper) report.j["outputs"]["mode"] = rep.mode.v;
  return report.emit(report_path, strict, rep.proper ? 0 : 2);
}

// ---------------------------------------------------------------------------
// posterior
// ---------------------------------------------------------------------------

int cmd_posterior(const std::string& model_path, const std::string& hyper_path,
                  const std::string& table_path, const std::string& output_path,
                  const std::string& report_path, bool strict) {
  run_report report("posterior");
  loglin::model m = load_model_into(report, model_path);
  loglin::hyperparameters h = load_hyper(report, m, hyper_path);
  report.add_input(table_path);
  loglin::contingency_table data = loglin::load_table(m.space, table_path);
  loglin::hyperparameters post = loglin::posterior_update(m, h, data);
  report.j["outputs"]["alpha_prior"] = h.alpha;
  report.j["outputs"]["sample_size"] = data.total();
  return write_hyper_output(report, m, post, output_path, report_path, strict);
}

// ---------------------------------------------------------------------------
// evidence / bf / elicit
// ---------------------------------------------------------------------------

int cmd_evidence(const std::string& model_path, const std::string& hyper_path,
                 const estimate_flags& flags, bool log10_out, const std::string& report_path,
                 bool strict) {
  run_report report("evidence");
  loglin::model m = load_model_into(report, model_path);
  loglin::hyperparameters h = load_hyper(report, m, hyper_path);
  loglin::evidence_result r = loglin::log_i(m, h, flags.policy());
  report.j["outputs"] = loglin::evidence_to_json(r);
  if (log10_out) {
    report.j["outputs"]["log10_i"] = r.log_i / std::log(10.0);
    if (r.std_error) report.j["outputs"]["log10_std_error"] = *r.std_error / std::log(10.0);
  }
  note_instability(report, r);
  return report.emit(report_path, strict);
}

int cmd_bf(const std::string& model1_path, const std::string& hyper1_path,
           const std::string& model2_path, const std::string& hyper2_path,
           const std::string& table_path, bool edge_local, const estimate_flags& flags,
           bool log10_out, const std::string& report_path, bool strict) {
  run_report report("bf");
  loglin::model m1 = load_model_into(report, model1_path, "model_hash");
  loglin::model m2 = load_model_into(report, model2_path, "model_hash_2");
  loglin::hyperparameters h1 = load_hyper(report, m1, hyper1_path);
  loglin::hyperparameters h2 = load_hyper(report, m2, hyper2_path);
  report.add_input(table_path);
  if (m1.space.names != m2.space.names || m1.space.levels != m2.space.levels)
    throw loglin::domain_error("bf: the two models must share one variable space");
  loglin::contingency_table data = loglin::load_table(m1.space, table_path);
  loglin::evidence_policy pol = flags.policy();
  double log_bf = edge_local ? loglin::bayes_factor_edge_local(m1, m2, h1, h2, data, pol)
                             : loglin::bayes_factor(m1, m2, h1, h2, data, pol);
  report.j["outputs"]["log_bayes_factor"] = log_bf;
  report.j["outputs"]["bayes_factor"] = std::exp(log_bf);
  if (log10_out) report.j["outputs"]["log10_bayes_factor"] = log_bf / std::log(10.0);
  report.j["outputs"]["route"] = edge_local ? "edge_local" : "full";
  return report.emit(report_path, strict);
}

int cmd_elicit(const std::string& model_path, const std::string& hyper_path,
               const std::string& set_arg, const std::string& cell_arg, int order,
               const estimate_flags& flags, const std::string& report_path, bool strict) {
  run_report report("elicit");
  loglin::model m = load_model_into(report, model_path);
  loglin::hyperparameters h = load_hyper(report, m, hyper_path);

  std::vector<std::string> set_names;
  {
    std::istringstream ss(set_arg);
    std::string item;
    while (std::getline(ss, item, ',')) set_names.push_back(item);
  }
  loglin::varset d = loglin::varset_from_names(m.space, set_names);
  if (!m.in_family(d)) throw loglin::domain_error("elicit: set is not in the model family");

  std::map<std::string, int> levels;
  {
    std::istringstream ss(cell_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t eq = item.find('=');
      if (eq == std::string::npos)
        throw loglin::parse_error("--cell expects name=level pairs, e.g. a=1,b=1");
      try {
        levels[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw loglin::parse_error("--cell level is not an integer");
      }
    }
  }
  const loglin::scope_codec& codec = m.codecs[m.set_index(d)];
  loglin::cell star(codec.arity());
  json cell_obj;
  for (int k = 0; k < codec.arity(); ++k) {
    const std::string& name = m.space.names[codec.vars[k]];
    auto it = levels.find(name);
    if (it == levels.end())
      throw loglin::parse_error("--cell is missing a level for variable '" + name + "'");
    star[k] = it->second;
    cell_obj[name] = it->second;
  }
  if (levels.size() != (std::size_t)codec.arity())
    throw loglin::parse_error("--cell names a variable outside --set");

  double value = loglin::prior_moment_exp_theta(m, h, d, star, order, flags.policy());
  report.j["outputs"]["set"] = loglin::varset_names(m.space, d);
  report.j["outputs"]["cell"] = cell_obj;
  report.j["outputs"]["order"] = order;
  report.j["outputs"]["quantity"] = order == 1 ? "mean_exp_theta" : "variance_exp_theta";
  report.j["outputs"]["value"] = value;
  return report.emit(report_path, strict);
}

// ---------------------------------------------------------------------------
// dump-f-matrix
// ---------------------------------------------------------------------------

std::string block_label(const loglin::variable_space& space, loglin::varset s,
                        const loglin::cell& marginal) {
  const loglin::scope_codec codec(space, s);
  std::string label = "\"{";
  for (int k = 0; k < codec.arity(); ++k) {
    if (k) label += ",";
    label += space.names[codec.vars[k]];
  }
  label += "}(";
  for (int k = 0; k < codec.arity(); ++k) {
    if (k) label += ",";
    label += std::to_string(marginal[k]);
  }
  label += ")\"";  // labels contain commas, so they are always CSV-quoted
  return label;
}

int cmd_dump_f_matrix(const std::string& model_path, const std::string& output_path,
                      const std::string& report_path, bool strict) {
  run_report report("dump-f-matrix");
  loglin::model m = load_model_into(report, model_path);
  loglin::f_matrix f = loglin::build_f_matrix(m);

  std::vector<std::vector<int>> dense(f.num_rows, std::vector<int>(f.num_cols, 0));
  for (auto [row, col, sign] : f.entries) dense[row][col] = sign;

  std::ostringstream out;
  out << "row";
  for (std::size_t hi = 0; hi < f.col_sets.size(); ++hi) {
    loglin::scope_codec codec(m.space, f.col_sets[hi]);
    for (std::size_t jc = 0; jc < codec.num_star_cells(); ++jc)
      out << ',' << block_label(m.space, f.col_sets[hi], codec.decode_star(jc));
  }
  out << '\n';
  for (int si = 0; si < m.num_sets(); ++si) {
    const loglin::scope_codec& codec = m.codecs[si];
    for (std::size_t sc = 0; sc < codec.num_star_cells(); ++sc) {
      std::size_t row = m.offsets[si] + sc;
      out << block_label(m.space, m.interactions[si], codec.decode_star(sc));
      for (std::size_t col = 0; col < f.num_cols; ++col) out << ',' << dense[row][col];
      out << '\n';
    }
  }
  loglin::write_text_file(output_path, out.str());

  report.j["outputs"]["output_file"] = output_path;
  report.j["outputs"]["rows"] = f.num_rows;
  report.j["outputs"]["cols"] = f.num_cols;
  if (m.graph) {
    json u0 = json::array();
    u0.push_back(json::array());  // the empty set, a = -1
    for (loglin::varset h : loglin::u_family(m)) u0.push_back(loglin::varset_names(m.space, h));
    report.j["outputs"]["u0"] = u0;
    json anomalies = json::array();
    for (loglin::varset h : loglin::u_family_anomalies(m))
      anomalies.push_back(loglin::varset_names(m.space, h));
    report.j["outputs"]["u_anomalies"] = anomalies;
    if (!anomalies.empty())
      report.warn("column-sum rule and graph characterization disagree on some subsets");
  }
  return report.emit(report_path, strict);
}

}  // namespace

// ---------------------------------------------------------------------------
// main
// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"Conjugate Bayesian inference for hierarchical log-linear models"};
  app.require_subcommand(1);
  bool strict = false;
  app.add_flag("--strict", strict, "Escalate numerical-instability warnings to exit code 3");

  std::string model_path, input_path, output_path, report_path, direction;
  std::string hyper_path, table_path, theta_path;
  std::string model2_path, hyper2_path, set_arg, cell_arg;
  double alpha = 1.0, total = 1.0;
  int order = 1;
  bool edge_local = false, log10_out = false;
  estimate_flags flags;

  auto add_report = [&](CLI::App* cmd) {
    cmd->add_option("--report", report_path, "Also write the run report to this file");
  };
  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--model", model_path, "Model file (JSON)")->required();
  };

  CLI::App* transform = app.add_subcommand("transform", "Convert between theta and free-probability files");
  add_model(transform);
  transform->add_option("--input", input_path, "Input vector file (JSON)")->required();
  transform->add_option("--output", output_path, "Output vector file")->required();
  transform->add_option("--direction", direction, "Conversion direction")
      ->check(CLI::IsMember({"to-p", "to-theta"}));
  add_report(transform);

  CLI::App* prior = app.add_subcommand("prior", "Construct or check conjugate priors");
  prior->require_subcommand(1);

  CLI::App* from_theta = prior->add_subcommand("from-theta", "Prior guess theta0 plus confidence alpha");
  add_model(from_theta);
  from_theta->add_option("--theta", theta_path, "Theta file (JSON)")->required();
  from_theta->add_option("--alpha", alpha, "Prior sample size")->required();
  from_theta->add_option("--output", output_path, "Output hyperparameter file")->required();
  add_report(from_theta);

  CLI::App* from_table = prior->add_subcommand("from-table", "Marginals of a positive prior table");
  add_model(from_table);
  from_table->add_option("--table", table_path, "Prior table (CSV)")->required();
  from_table->add_option("--output", output_path, "Output hyperparameter file")->required();
  add_report(from_table);

  CLI::App* perks = prior->add_subcommand("perks", "Vague prior from a uniform pseudo-table");
  add_model(perks);
  perks->add_option("--total", total, "Pseudo-table total mass")->capture_default_str();
  perks->add_option("--output", output_path, "Output hyperparameter file")->required();
  add_report(perks);

  CLI::App* check = prior->add_subcommand("check", "Properness check (exit 0 iff proper)");
  add_model(check);
  check->add_option("--hyper", hyper_path, "Hyperparameter file (JSON)")->required();
  add_report(check);

  CLI::App* posterior = app.add_subcommand("posterior", "Conjugate posterior update from data");
  add_model(posterior);
  posterior->add_option("--hyper", hyper_path, "Prior hyperparameter file")->required();
  posterior->add_option("--table", table_path, "Data table (CSV)")->required();
  posterior->add_option("--output", output_path, "Output hyperparameter file")->required();
  add_report(posterior);

  CLI::App* evidence = app.add_subcommand("evidence", "Log normalizing constant of the prior");
  add_model(evidence);
  evidence->add_option("--hyper", hyper_path, "Hyperparameter file")->required();
  flags.attach(evidence);
  evidence->add_flag("--log10", log10_out, "Also report base-10 logarithms");
  add_report(evidence);

  CLI::App* bf = app.add_subcommand("bf", "Bayes factor between two models on shared data");
  bf->add_option("--model-1", model_path, "First model file")->required();
  bf->add_option("--hyper-1", hyper_path, "First hyperparameter file")->required();
  bf->add_option("--model-2", model2_path, "Second model file")->required();
  bf->add_option("--hyper-2", hyper2_path, "Second hyperparameter file")->required();
  bf->add_option("--table", table_path, "Data table (CSV)")->required();
  bf->add_flag("--edge-local", edge_local, "Cancel shared prime blocks before evaluating");
  flags.attach(bf);
  bf->add_flag("--log10", log10_out, "Also report base-10 logarithms");
  add_report(bf);

  CLI::App* elicit = app.add_subcommand("elicit", "Prior moments of exp(theta) for one interaction cell");
  add_model(elicit);
  elicit->add_option("--hyper", hyper_path, "Hyperparameter file")->required();
  elicit->add_option("--set", set_arg, "Interaction set, e.g. b,c")->required();
  elicit->add_option("--cell", cell_arg, "Star cell, e.g. b=1,c=1")->required();
  elicit->add_option("--order", order, "1 = mean, 2 = variance")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  flags.attach(elicit);
  add_report(elicit);

  CLI::App* dump_f = app.add_subcommand("dump-f-matrix", "Write the signed incidence matrix F as CSV");
  add_model(dump_f);
  dump_f->add_option("--output", output_path, "Output CSV file")->required();
  add_report(dump_f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;  // fold CLI11's usage codes into exit 1
  }

  try {
    if (app.got_subcommand(transform))
      return cmd_transform(model_path, input_path, direction, output_path, report_path, strict);
    if (app.got_subcommand(prior)) {
      if (prior->got_subcommand(from_theta))
        return cmd_prior_from_theta(model_path, theta_path, alpha, output_path, report_path, strict);
      if (prior->got_subcommand(from_table))
        return cmd_prior_from_table(model_path, table_path, output_path, report_path, strict);
      if (prior->got_subcommand(perks))
        return cmd_prior_perks(model_path, total, output_path, report_path, strict);
      return cmd_prior_check(model_path, hyper_path, report_path, strict);
    }
    if (app.got_subcommand(posterior))
      return cmd_posterior(model_path, hyper_path, table_path, output_path, report_path, strict);
    if (app.got_subcommand(evidence))
      return cmd_evidence(model_path, hyper_path, flags, log10_out, report_path, strict);
    if (app.got_subcommand(bf))
      return cmd_bf(model_path, hyper_path, model2_path, hyper2_path, table_path, edge_local,
                    flags, log10_out, report_path, strict);
    if (app.got_subcommand(elicit))
      return cmd_elicit(model_path, hyper_path, set_arg, cell_arg, order, flags, report_path,
                        strict);
    if (app.got_subcommand(dump_f))
      return cmd_dump_f_matrix(model_path, output_path, report_path, strict);
  } catch (const loglin::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const loglin::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const loglin::numerical_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
