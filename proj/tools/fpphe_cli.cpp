// Command-line front end. Every subcommand assembles a JSON request from an
// optional --input document plus flags, hands it to the C library and prints
// the records.
//
// Exit codes: 0 success, 1 invalid input, 2 infeasible or unstable result,
// 3 resource cap.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpphe/fpphe.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitResource = 3;

int exit_code(fpphe_status s) {
  switch (s) {
    case FPPHE_OK: return kExitOk;
    case FPPHE_INFEASIBLE:
    case FPPHE_UNSTABLE: return kExitInfeasible;
    case FPPHE_RESOURCE: return kExitResource;
    default: return kExitInvalid;
  }
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inline JSON when the text starts with '{', else a file path.
json load_document(const std::string& source) {
  std::string text = source;
  if (source.find_first_not_of(" \t\n") == std::string::npos || source[source.find_first_not_of(" \t\n")] != '{') {
    std::ifstream in(source);
    if (!in) throw UsageError("cannot read " + source);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw UsageError(source + " is not a JSON object");
  return j;
}

// "D=3,L=1,H=1,R=2"
json parse_tile(const std::string& text) {
  json t = json::object();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--tile expects D=..,L=..,H=..,R=..");
    const std::string key = item.substr(0, eq);
    if (key != "D" && key != "L" && key != "H" && key != "R") {
      throw UsageError("unknown tile parameter '" + key + "'");
    }
    try {
      t[key] = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("tile parameter " + key + " is not an integer");
    }
  }
  for (const char* k : {"D", "L", "H", "R"}) {
    if (!t.contains(k)) throw UsageError(std::string("--tile is missing ") + k);
  }
  return t;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("'" + item + "' is not a number");
    }
  }
  return out;
}

struct Command {
  std::string op;
  std::string input;
  json flags = json::object();
  std::string tile;
  std::string mu_list;
  std::string analytics_name;
  std::string brw_name;
  std::string kind;
  std::string side;
  std::string out_path;
  std::string format = "json";
  int workers = 0;
};

template <class T>
void flag(CLI::App* app, Command& c, const std::string& name, const std::string& key,
          const std::string& help) {
  app->add_option_function<T>(name, [&c, key](const T& v) { c.flags[key] = v; }, help);
}

void common_random(CLI::App* app, Command& c) {
  flag<std::uint64_t>(app, c, "--master-seed", "master_seed", "64-bit master seed (required)");
  app->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  flag<std::uint64_t>(app, c, "--trials", "trials", "Number of trials");
}

void input_and_output(CLI::App* app, Command& c) {
  app->add_option("--input", c.input, "Request JSON file or inline JSON object");
  app->add_option("--out", c.out_path, "Output file (default stdout)");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv", "dot"}));
}

void rates(CLI::App* app, Command& c) {
  flag<double>(app, c, "--mu", "mu", "Seed density");
  flag<double>(app, c, "--lambda", "lambda", "Rate of FPP_lambda");
}

std::string dash_to_underscore(std::string s) {
  for (char& ch : s) {
    if (ch == '-') ch = '_';
  }
  return s;
}

// Assembles the request for the selected subcommand.
json build_request(Command& c) {
  json q = c.input.empty() ? json::object() : load_document(c.input);
  for (auto& [k, v] : c.flags.items()) q[k] = v;
  if (!c.mu_list.empty()) q["mu_list"] = parse_list(c.mu_list);
  const bool has_tile = !c.tile.empty();
  const json tile = has_tile ? parse_tile(c.tile) : json();

  if (c.op == "graph") {
    json spec = q.contains("graph") ? q.at("graph") : json::object();
    for (const char* k : {"d", "h", "k", "phi", "depth"}) {
      if (q.contains(k)) spec[k] = q.at(k);
    }
    if (has_tile) spec["tile"] = tile;
    if (!c.side.empty()) spec["side"] = c.side;
    if (q.value("merge_parallel_edges", false)) spec["merge_parallel_edges"] = true;
    if (!c.kind.empty()) {
      spec["kind"] = c.kind;
    } else if (!spec.contains("kind") && !spec.contains("format")) {
      if (spec.contains("phi") || spec.contains("depth")) {
        spec["kind"] = "tile_tree";
      } else if (!c.side.empty()) {
        spec["kind"] = "restricted_tile";
      } else if (has_tile) {
        spec["kind"] = "tile";
      } else {
        throw UsageError("graph needs --tile or --kind");
      }
    }
    return {{"graph", spec}, {"format", c.format == "dot" ? "dot" : "json"}};
  }
  if (c.op == "estimate" || c.op == "simulate") {
    if (has_tile && !q.contains("graph")) q["graph"] = {{"kind", "tile"}, {"tile", tile}};
    if (!q.contains("graph")) throw UsageError(c.op + " needs a graph (--tile or --input)");
    return q;
  }
  if (has_tile) q["tile"] = tile;
  if (!c.side.empty()) q["side"] = c.side;
  return q;
}

void write_output(const Command& c, const std::string& text) {
  if (c.out_path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(c.out_path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + c.out_path);
  out << text;
}

int run(Command& c) {
  std::string op = c.op;
  if (op == "analytics") op = "analytics." + dash_to_underscore(c.analytics_name);
  if (op == "brw-diag") op = "brw." + dash_to_underscore(c.brw_name);
  if (op == "estimate-constants") op = "estimate_constants";

  const json request = build_request(c);
  char* raw = nullptr;
  const fpphe_status s = fpphe_run_json(op.c_str(), request.dump().c_str(), c.workers, &raw);
  if (s != FPPHE_OK) {
    std::cerr << "error (" << fpphe_status_name(s) << "): " << fpphe_last_error() << "\n";
    return exit_code(s);
  }
  const json response = json::parse(raw);
  fpphe_string_free(raw);

  std::string text;
  if (c.format == "csv") {
    if (!response.contains("csv")) throw UsageError("csv output is not available for " + c.op);
    text = response.at("csv").get<std::string>();
  } else if (c.format == "dot") {
    if (c.op != "graph") throw UsageError("dot output is only available for graph");
    text = response.at("records").at(0).at("dot").get<std::string>();
  } else {
    for (const json& r : response.at("records")) text += r.dump() + "\n";
    if (response.contains("trace")) text += response.at("trace").get<std::string>();
  }
  write_output(c, text);
  if (response.contains("timing")) std::cerr << "timing " << response.at("timing").dump() << "\n";

  if (c.op == "feasibility" && !response.at("records").at(0).at("feasible").get<bool>()) {
    std::cerr << "infeasible: " << response.at("records").at(0).value("diagnostics", "") << "\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis toolkit for first passage percolation in a hostile "
               "environment"};
  app.require_subcommand(1);
  Command c;

  auto* graph = app.add_subcommand("graph", "Build a graph and print it as JSON or DOT");
  input_and_output(graph, c);
  graph->add_option("--tile", c.tile, "Tile parameters D=..,L=..,H=..,R=..");
  graph->add_option("--kind", c.kind, "complete_tree | capped_tree | path | tile | tile_tree | restricted_tile");
  graph->add_option("--side", c.side, "upper | lower (restricted tile)");
  flag<int>(graph, c, "--d", "d", "Tree arity");
  flag<int>(graph, c, "--height", "h", "Tree height");
  flag<int>(graph, c, "--k", "k", "Path length");
  flag<int>(graph, c, "--phi", "phi", "Tile-tree branching");
  flag<int>(graph, c, "--depth", "depth", "Tile-tree depth");
  graph->add_flag_function("--merge", [&c](std::int64_t) { c.flags["merge_parallel_edges"] = true; },
                           "Merge parallel edges into caps");

  auto* simulate = app.add_subcommand("simulate", "Run one simulation");
  input_and_output(simulate, c);
  rates(simulate, c);
  simulate->add_option("--tile", c.tile, "Tile parameters");
  flag<std::uint64_t>(simulate, c, "--master-seed", "master_seed", "64-bit master seed (required)");
  flag<std::uint64_t>(simulate, c, "--trial-index", "trial_index", "Trial index for the rng streams");
  flag<std::string>(simulate, c, "--target", "target", "Stop target (landmark or id)");
  simulate->add_flag_function("--trace", [&c](std::int64_t) { c.flags["trace"] = true; },
                              "Append infection events as JSON lines");

  auto* estimate = app.add_subcommand("estimate", "Monte Carlo estimate of an event");
  input_and_output(estimate, c);
  rates(estimate, c);
  common_random(estimate, c);
  estimate->add_option("--tile", c.tile, "Tile parameters");

  auto* sweep = app.add_subcommand("sweep", "Sweep P(B infected by FPP1) over mu on a tile");
  input_and_output(sweep, c);
  common_random(sweep, c);
  flag<double>(sweep, c, "--lambda", "lambda", "Rate of FPP_lambda");
  sweep->add_option("--tile", c.tile, "Tile parameters");
  sweep->add_option("--mu-list", c.mu_list, "Comma-separated mu values");

  auto* survival = app.add_subcommand("survival", "Reach probability on a truncated tile tree");
  input_and_output(survival, c);
  rates(survival, c);
  common_random(survival, c);
  survival->add_option("--tile", c.tile, "Tile parameters");
  flag<int>(survival, c, "--phi", "phi", "Tiles per junction");
  flag<int>(survival, c, "--depth", "depth", "Tile depth");

  auto* restricted = app.add_subcommand("restricted", "Passage events on one side of a tile");
  input_and_output(restricted, c);
  rates(restricted, c);
  common_random(restricted, c);
  restricted->add_option("--tile", c.tile, "Tile parameters");
  restricted->add_option("--side", c.side, "upper | lower");

  auto* selftest = app.add_subcommand("selftest", "Coverage of the Wilson interval");
  input_and_output(selftest, c);
  common_random(selftest, c);
  flag<double>(selftest, c, "--p-true", "p_true", "True success probability");
  flag<std::uint64_t>(selftest, c, "--outer", "outer", "Number of intervals");
  flag<std::uint64_t>(selftest, c, "--inner", "inner", "Bernoulli draws per interval");
  flag<double>(selftest, c, "--z", "z", "Normal quantile");

  auto* feasibility = app.add_subcommand("feasibility", "Solve for tile parameters H and L");
  input_and_output(feasibility, c);
  flag<double>(feasibility, c, "--lambda", "lambda", "Rate of FPP_lambda");
  flag<double>(feasibility, c, "--frak-c", "frak_c", "Uniform edge constant");
  flag<double>(feasibility, c, "--eps", "eps", "Edge quantile level used when --frak-c is absent");
  flag<std::int64_t>(feasibility, c, "--R", "R", "Path length R");

  auto* constants = app.add_subcommand("estimate-constants", "Estimate the path-rate constants");
  input_and_output(constants, c);
  flag<std::uint64_t>(constants, c, "--master-seed", "master_seed", "64-bit master seed (required)");
  flag<int>(constants, c, "--trials", "trials", "Number of trials (>= 1000)");
  flag<int>(constants, c, "--d", "d", "Tree arity (1 = path)");
  flag<double>(constants, c, "--gamma", "gamma", "Edge rate");
  flag<int>(constants, c, "--k-min", "k_min", "Smallest depth");
  flag<int>(constants, c, "--k-max", "k_max", "Largest depth");

  auto* analytics = app.add_subcommand("analytics", "Closed-form calculators");
  input_and_output(analytics, c);
  analytics->add_option("name", c.analytics_name,
                        "gw | tech | p-one | quantile | frak-c | janson-upper | janson-lower | phi | "
                        "eps-max | perc-threshold")
      ->required()
      ->check(CLI::IsMember({"gw", "tech", "p-one", "quantile", "frak-c", "janson-upper",
                             "janson-lower", "phi", "eps-max", "perc-threshold"}));
  flag<int>(analytics, c, "--d", "d", "Arity");
  flag<double>(analytics, c, "--mu", "mu", "Seed density");
  flag<double>(analytics, c, "--tol", "tol", "Tolerance");
  flag<double>(analytics, c, "--eps", "eps", "Probability level");
  flag<double>(analytics, c, "--gamma", "gamma", "Rate");
  flag<double>(analytics, c, "--lambda", "lambda", "Rate of FPP_lambda");
  flag<double>(analytics, c, "--a-star", "a_star", "Smallest rate");
  flag<double>(analytics, c, "--mean", "mean", "Mean of the sum");
  flag<double>(analytics, c, "--delta", "delta", "Relative deviation");
  flag<int>(analytics, c, "--D", "D", "Upper tree arity");
  flag<double>(analytics, c, "--mu2", "mu2", "Seed density mu_2");
  flag<double>(analytics, c, "--eta", "eta", "Existential constant eta (default 0)");
  flag<double>(analytics, c, "--f", "f", "Extinction probability f_D (default computed)");
  flag<int>(analytics, c, "--phi", "phi", "Tree branching");

  auto* brw = app.add_subcommand("brw-diag", "Branching random walk diagnostics");
  input_and_output(brw, c);
  brw->add_option("name", c.brw_name, "sample | min-passage | birth | inverse-rate | sandwich")
      ->required()
      ->check(CLI::IsMember({"sample", "min-passage", "birth", "inverse-rate", "sandwich"}));
  flag<std::uint64_t>(brw, c, "--master-seed", "master_seed", "64-bit master seed (required)");
  flag<int>(brw, c, "--trials", "trials", "Number of trials");
  flag<int>(brw, c, "--d", "d", "Arity");
  flag<double>(brw, c, "--mu", "mu", "Seed density");
  flag<double>(brw, c, "--gamma", "gamma", "Birth rate");
  flag<int>(brw, c, "--n", "n", "Target level");
  flag<int>(brw, c, "--n-max", "n_max", "Largest generation");
  flag<int>(brw, c, "--max-gen", "max_gen", "Largest generation");
  flag<double>(brw, c, "--c1", "c1", "Birth-time constant C1");
  flag<double>(brw, c, "--eps1", "eps1", "Sandwich exponent slack");
  flag<double>(brw, c, "--eps-prime", "eps_prime", "Sandwich prefactor");
  brw->add_flag_function("--fit", [&c](std::int64_t) { c.flags["fit"] = true; },
                         "Fit the concentration tail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  c.op = app.get_subcommands().front()->get_name();
  try {
    return run(c);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}
