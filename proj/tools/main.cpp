#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "commands.hpp"
#include "report.hpp"
#include "verify.hpp"

using namespace deception;
using namespace deception::cli;

namespace {

constexpr int kExitFailedCheck = 1;
constexpr int kExitError = 2;

void write_text(std::ostream& out, const Table& t) {
  std::vector<std::size_t> width(t.columns.size());
  for (std::size_t i = 0; i < t.columns.size(); ++i) width[i] = t.columns[i].size();
  for (const auto& row : t.rows)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], cell_text(row[i]).size());
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      s += cells[i];
      if (i + 1 < cells.size()) s += std::string(width[i] - cells[i].size() + 2, ' ');
    }
    out << s << '\n';
  };
  line(t.columns);
  for (const auto& row : t.rows) {
    std::vector<std::string> cells;
    for (const auto& c : row) cells.push_back(cell_text(c));
    line(cells);
  }
}

std::string render(const Report& r, const std::string& format) {
  std::ostringstream out;
  if (format == "json") {
    out << r.json().dump(2) << '\n';
  } else if (format == "csv") {
    write_csv(out, r.table);
  } else {
    write_text(out, r.table);
  }
  return out.str();
}

// The artifact goes to --out when given (summary on stdout), else to stdout (summary on stderr).
int emit(const Report& r, const std::string& format, const std::string& out_path) {
  const std::string artifact = render(r, format);
  if (out_path.empty()) {
    std::cout << artifact << std::flush;
    std::cerr << r.summary << '\n';
  } else {
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw ValidationError(out_path + ": cannot open output file");
    file << artifact;
    if (!file.flush()) throw ValidationError(out_path + ": write failed");
    std::cout << r.summary << '\n';
  }
  return r.ok ? 0 : kExitFailedCheck;
}

struct Command {
  CLI::App* app;
  std::string default_format;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal deception exponents for biometric authentication with adversary side information"};
  app.require_subcommand(1);

  Inputs in;
  std::string format;
  std::string out_path;

  auto add_model = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--model", in.model_path, "model file (JSON, see docs/model-format.md)")
                    ->check(CLI::ExistingFile);
    if (required) opt->required();
  };
  auto add_output = [&](CLI::App* sub, const std::string& fallback) {
    sub->add_option("--emit", format, "output format (default " + fallback + ")")
        ->check(CLI::IsMember({"json", "csv", "text"}));
    sub->add_option("--out", out_path, "write the artifact here; the summary then goes to stdout");
  };
  auto add_delta = [&](CLI::App* sub) {
    sub->add_option("--delta", in.deltas, "distortion level(s) as rationals such as 1/10; default: the model's")
        ->delimiter(',');
  };
  auto add_n = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--n", in.ns, "blocklength(s), comma separated")->delimiter(',');
    if (required) opt->required();
  };
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", in.seed, "random seed")->capture_default_str();
  };

  std::vector<Command> commands;

  auto* exponent = app.add_subcommand("exponent", "optimal deception exponent E*(delta) and its optimizer");
  add_model(exponent, true);
  add_delta(exponent);
  exponent->add_option("--starts", in.starts, "random optimizer starts")->capture_default_str();
  add_seed(exponent);
  exponent->add_option("--tol", in.tol, "optimizer stopping tolerance (nats)");
  exponent->add_option("--threads", in.threads, "worker threads for the optimizer starts")->capture_default_str();
  add_output(exponent, "json");
  commands.push_back({exponent, "json"});

  auto* curve = app.add_subcommand("rd-curve", "conditional rate-distortion curve, or points at given levels");
  add_model(curve, true);
  add_delta(curve);
  curve->add_option("--tol", in.tol, "Lagrangian objective gap (nats)");
  add_output(curve, "csv");
  commands.push_back({curve, "csv"});

  auto* oracle = app.add_subcommand("oracle", "exact optimal adversary success probability at blocklength n");
  add_model(oracle, true);
  add_delta(oracle);
  add_n(oracle, true);
  oracle->add_option("--mode", in.mode, "naive, fast or both")
      ->check(CLI::IsMember({"naive", "fast", "both"}))
      ->capture_default_str();
  oracle->add_flag("--force", in.force, "run past the evaluation budget");
  add_output(oracle, "json");
  commands.push_back({oracle, "json"});

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo success rate of the optimal adversary");
  add_model(simulate, true);
  add_delta(simulate);
  add_n(simulate, true);
  simulate->add_option("--trials", in.trials, "Monte Carlo trials")->capture_default_str();
  add_seed(simulate);
  add_output(simulate, "json");
  commands.push_back({simulate, "json"});

  auto* attack = app.add_subcommand("attack", "pigeonhole attack built from a random rate-distortion code");
  add_model(attack, true);
  add_delta(attack);
  add_n(attack, true);
  attack->add_option("--rate", in.rate, "code rate in nats per symbol")->required();
  add_seed(attack);
  add_output(attack, "json");
  commands.push_back({attack, "json"});

  auto* types = app.add_subcommand("types", "method-of-types demonstrations and exact identities");
  types->add_option("action", in.action, "demo-covering, demo-neighborhood or verify-bounds")
      ->required()
      ->check(CLI::IsMember({"demo-covering", "demo-neighborhood", "verify-bounds"}));
  add_model(types, false);
  types->add_option("--n", in.ns, "blocklength (largest blocklength for verify-bounds)")->expected(1);
  types->add_option("--alphabet", in.alphabet, "alphabet size, overriding the model");
  add_seed(types);
  add_output(types, "text");
  commands.push_back({types, "text"});

  auto* verify = app.add_subcommand("verify", "cross-module consistency checks on one model");
  add_model(verify, true);
  add_delta(verify);
  verify->add_option("--starts", in.starts, "random optimizer starts")->capture_default_str();
  add_seed(verify);
  verify->add_option("--threads", in.threads, "worker threads for the optimizer starts")->capture_default_str();
  add_output(verify, "text");
  commands.push_back({verify, "text"});

  CLI11_PARSE(app, argc, argv);

  const Command* chosen = nullptr;
  for (const auto& c : commands)
    if (c.app->parsed()) chosen = &c;
  if (format.empty()) format = chosen->default_format;
  const std::string name = chosen->app->get_name();

  std::optional<Model> model;
  try {
    if (!in.model_path.empty()) model = load_model(in.model_path);
  } catch (const Error& e) {
    if (name != "verify") {
      std::cerr << "error: " << e.what() << '\n';
      return kExitError;
    }
    Report r;
    r.command = "verify";
    r.table.columns = {"check", "status", "measured", "tolerance", "detail"};
    r.table.add({std::string("model-valid"), std::string("FAIL"), 1.0, 0.0, std::string(e.what())});
    r.ok = false;
    r.summary = "verify: model rejected: " + std::string(e.what());
    return emit(r, format, out_path);
  }

  try {
    Report r;
    if (name == "exponent") r = run_exponent(in, *model);
    else if (name == "rd-curve") r = run_rd_curve(in, *model);
    else if (name == "oracle") r = run_oracle(in, *model);
    else if (name == "simulate") r = run_simulate(in, *model);
    else if (name == "attack") r = run_attack(in, *model);
    else if (name == "types") r = run_types(in, model ? &*model : nullptr);
    else r = run_verify(in, *model);
    return emit(r, format, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
