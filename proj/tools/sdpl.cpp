#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sdplocal/sdplocal.h"

namespace {

using Json = nlohmann::ordered_json;

enum class Kind { kInt, kReal, kText, kFlag, kSeeds, kReals };

struct Key {
  const char* name;
  Kind kind;
  const char* help;
};

// Every command accepts the same flags; a flag the command does not read is rejected with exit 2.
const std::vector<Key> kKeys = {
    {"n", Kind::kInt, "number of vertices"},
    {"d", Kind::kReal, "average degree"},
    {"a", Kind::kReal, "within-community degree parameter"},
    {"b", Kind::kReal, "across-community degree parameter"},
    {"lambda", Kind::kReal, "signal strength (a-b)/sqrt(2(a+b))"},
    {"delta", Kind::kReal, "revealed fraction, or dual shift for dual-bound"},
    {"ell", Kind::kInt, "local radius"},
    {"depth_L", Kind::kInt, "harmonic depth L"},
    {"depth", Kind::kInt, "tree depth"},
    {"rank", Kind::kInt, "factor rank (0 picks a default)"},
    {"restarts", Kind::kInt, "random restarts"},
    {"max_sweeps", Kind::kInt, "sweep limit"},
    {"tol", Kind::kReal, "tolerance"},
    {"seed", Kind::kInt, "base seed"},
    {"seeds", Kind::kSeeds, "seed count, or a comma separated list"},
    {"ds", Kind::kReals, "comma separated degree grid"},
    {"pool", Kind::kInt, "population size for tree recursions"},
    {"samples", Kind::kInt, "Monte Carlo samples"},
    {"trials", Kind::kInt, "independent trials"},
    {"iterations", Kind::kInt, "power iterations"},
    {"graphs", Kind::kInt, "number of random graphs"},
    {"max_n", Kind::kInt, "largest random graph"},
    {"u_per_graph", Kind::kInt, "values of u per graph"},
    {"eps", Kind::kReal, "test margin"},
    {"slack", Kind::kReal, "bound check slack"},
    {"alpha", Kind::kReal, "significance level"},
    {"model", Kind::kText, "er or sbm"},
    {"rule", Kind::kText, "simple, harmonic or sbm"},
    {"method", Kind::kText, "closed, mc or both"},
    {"policy", Kind::kText, "bfs or root-mark"},
    {"kind", Kind::kText, "bound kind"},
    {"mutation", Kind::kText, "deliberate defect for the self test"},
    {"input", Kind::kText, "edge list to read"},
    {"labels", Kind::kText, "label file to read"},
    {"labels_out", Kind::kText, "label file to write"},
    {"fields_out", Kind::kText, "local field file to write"},
    {"factor_out", Kind::kText, "factor file to write"},
    {"warm_start_ell", Kind::kInt, "warm start the solver from local fields of this radius"},
    {"strict", Kind::kFlag, "also check the strict rank-one weight"},
    {"format", Kind::kText, "json, csv or jsonl"},
};

std::string flag_name(const std::string& key) {
  std::string f = key;
  for (char& c : f)
    if (c == '_') c = '-';
  return "--" + f;
}

Json parse_seeds(const std::string& text) {
  if (text.find(',') == std::string::npos) return Json(std::stoull(text));
  Json list = Json::array();
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) list.push_back(std::stoull(item));
  return list;
}

Json parse_reals(const std::string& text) {
  Json list = Json::array();
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) list.push_back(std::stod(item));
  return list;
}

struct Invocation {
  std::map<std::string, std::string> values;
  bool strict = false;
  std::string config_path, out_path;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local algorithms and the Burer-Monteiro SDP on sparse random graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sdpl_version());

  const std::pair<const char*, const char*> commands[] = {
      {"gen", "write a random graph as an edge list"},
      {"fig1", "sweep d and compare the solver with local and dual bounds (CSV)"},
      {"sbm-test", "threshold test: planted partition against the null model"},
      {"bounds", "planted-partition local values, tree bounds and solver value"},
      {"gw-bound", "tree recursion bounds (harmonic, simple, sbm)"},
      {"local-value", "value of a local rule on a graph, closed form or Monte Carlo"},
      {"sdp-solve", "run the rank-constrained solver on a graph"},
      {"dual-bound", "Bethe-Hessian dual witness and its PSD check"},
      {"nb-spectrum", "spectral radius of the centered non-backtracking operator"},
      {"ihara-bass", "check the weighted determinant identity on random graphs"},
      {"selftest", "internal consistency suites"},
  };
  const std::size_t ncmd = std::size(commands);
  std::vector<const char*> names(ncmd);
  std::vector<Invocation> inv(ncmd);
  std::vector<CLI::App*> subs(ncmd);
  for (std::size_t c = 0; c < ncmd; ++c) {
    names[c] = commands[c].first;
    CLI::App* sub = app.add_subcommand(commands[c].first, commands[c].second);
    subs[c] = sub;
    for (const Key& key : kKeys) {
      if (key.kind == Kind::kFlag) {
        sub->add_flag(flag_name(key.name), inv[c].strict, key.help);
      } else {
        sub->add_option(flag_name(key.name), inv[c].values[key.name], key.help);
      }
    }
    sub->add_option("--config", inv[c].config_path, "JSON config file; flags override its keys");
    sub->add_option("--out", inv[c].out_path, "write output here instead of stdout");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::size_t chosen = 0;
  while (!subs[chosen]->parsed()) ++chosen;
  Invocation& run = inv[chosen];
  CLI::App* sub = subs[chosen];

  Json config = Json::object();
  try {
    if (!run.config_path.empty()) {
      std::ifstream f(run.config_path);
      if (!f) {
        std::cerr << "cannot open config " << run.config_path << '\n';
        return 2;
      }
      config = Json::parse(f);
      if (!config.is_object()) throw std::invalid_argument("config file must hold a JSON object");
    }
    for (const Key& key : kKeys) {
      if (sub->count(flag_name(key.name)) == 0) continue;
      const std::string& text = run.values[key.name];
      switch (key.kind) {
        case Kind::kInt: {
          std::size_t used = 0;
          const long long v = std::stoll(text, &used);
          if (used != text.size()) throw std::invalid_argument(text);
          config[key.name] = v;
          break;
        }
        case Kind::kReal: {
          std::size_t used = 0;
          const double v = std::stod(text, &used);
          if (used != text.size()) throw std::invalid_argument(text);
          config[key.name] = v;
          break;
        }
        case Kind::kText: config[key.name] = text; break;
        case Kind::kFlag: config[key.name] = run.strict; break;
        case Kind::kSeeds: config[key.name] = parse_seeds(text); break;
        case Kind::kReals: config[key.name] = parse_reals(text); break;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "bad argument: " << e.what() << '\n';
    return 2;
  }

  char* output = nullptr;
  int exit_code = 2;
  const std::string text = config.dump();
  const sdpl_status status = sdpl_run_command(names[chosen], text.c_str(), &output, &exit_code);
  if (status != SDPL_OK && status != SDPL_INVALID_PARAMETER) {
    std::cerr << sdpl_status_name(status) << ": " << sdpl_last_error() << '\n';
    sdpl_string_free(output);
    return exit_code == 0 ? 1 : exit_code;
  }
  const std::string result = output ? output : "";
  sdpl_string_free(output);
  if (!run.out_path.empty()) {
    std::ofstream f(run.out_path);
    if (!f) {
      std::cerr << "cannot write " << run.out_path << '\n';
      return 2;
    }
    f << result;
  } else {
    std::cout << result;
  }
  if (exit_code != 0 && !run.out_path.empty()) std::cerr << result;
  return exit_code;
}
