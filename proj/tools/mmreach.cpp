#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "mmreach/mmreach.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::string fixture;
  std::string decomp;
  std::string domain;
  std::string box;
  std::string start;
  std::string witness;
  std::string method;
  std::string kind;
  std::string test_box;
  std::string out_dir;
  std::string stem;
  std::string integ;
  double T = 1.0;
  double tol = 0.0;
  double rtol = 1e-8;
  double atol = 1e-10;
  double fixed_step = 1e-2;
  std::size_t samples = 10000;
  std::size_t count = 10000;
  std::size_t switches = 8;
  std::uint64_t seed = 7;
  bool backward = false;
  bool no_csv = false;
  bool no_json = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file; flags override its fields");
  cmd->add_option("--fixture", f.fixture, "built-in system (see the fixtures command)");
  cmd->add_option("--decomp", f.decomp,
                  "decomposition mode: builtin, polynomial, jacobian, monotone, user");
  cmd->add_option("--domain", f.domain, "state domain override, e.g. \"[-5,5]x[-5,5]\"");
  cmd->add_option("--out", f.out_dir, "output directory (default .)");
  cmd->add_option("--stem", f.stem, "artifact name stem (default: command name)");
  cmd->add_flag("--no-csv", f.no_csv, "skip CSV artifacts");
  cmd->add_flag("--no-json", f.no_json, "skip JSON artifacts");
  cmd->add_option("--integrator", f.integ, "rkf45 (default) or rk4");
  cmd->add_option("--rtol", f.rtol, "relative tolerance");
  cmd->add_option("--atol", f.atol, "absolute tolerance");
  cmd->add_option("--fixed-step", f.fixed_step, "rk4 step size");
}

mmreach::AnalysisConfig assemble(const CLI::App* cmd, const Flags& f, const std::string& kind) {
  using namespace mmreach;
  AnalysisConfig cfg;
  auto has = [&](const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt && opt->count() > 0;
  };
  if (has("--config")) cfg = load_config(f.config_path);
  cfg.command.kind = kind;

  if (has("--fixture")) cfg.system.fixture = f.fixture;
  if (has("--decomp")) cfg.decomposition.mode = f.decomp;
  if (has("--domain")) cfg.system.domain = parse_rect_literal(f.domain, true);
  if (has("--x0") || has("--x1")) cfg.command.box = parse_rect_literal(f.box, false);
  if (has("--T")) cfg.command.T = f.T;
  if (has("--start"))
    cfg.command.start = EmbeddingPoint::from_rect(parse_rect_literal(f.start, false));
  if (has("--witness"))
    cfg.command.witness = EmbeddingPoint::from_rect(parse_rect_literal(f.witness, false));
  if (has("--method")) cfg.command.method = f.method;
  if (has("--kind")) cfg.command.cert_kind = f.kind;
  if (has("--tol")) cfg.command.tol = f.tol;
  if (has("--samples")) cfg.command.samples = f.samples;
  if (has("--test-box")) cfg.command.test_box = parse_rect_literal(f.test_box, false);
  if (has("--count")) cfg.command.count = f.count;
  if (has("--seed")) cfg.command.seed = f.seed;
  if (has("--switches")) cfg.command.switches = f.switches;
  if (has("--backward")) {
    if (kind == "montecarlo")
      cfg.command.backward = true;
    else
      cfg.decomposition.backward = true;
  }
  if (has("--out")) cfg.output.dir = f.out_dir;
  if (has("--stem")) cfg.output.stem = f.stem;
  if (f.no_csv) cfg.output.csv = false;
  if (f.no_json) cfg.output.json_files = false;
  if (has("--integrator")) {
    if (f.integ == "rkf45")
      cfg.integrator.method = IntegratorConfig::Method::rkf45;
    else if (f.integ == "rk4")
      cfg.integrator.method = IntegratorConfig::Method::rk4;
    else
      throw ConfigError("--integrator must be rkf45 or rk4");
  }
  if (has("--rtol")) cfg.integrator.rtol = f.rtol;
  if (has("--atol")) cfg.integrator.atol = f.atol;
  if (has("--fixed-step")) cfg.integrator.fixed_step = f.fixed_step;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reachable set over-approximation and invariance certificates via "
               "mixed-monotone embeddings"};
  app.set_version_flag("--version", std::string(mmreach::kToolVersion));
  app.require_subcommand(1);
  Flags f;

  CLI::App* reach = app.add_subcommand("reach", "over-approximate a forward reachable set");
  add_common(reach, f);
  reach->add_option("--x0", f.box, "initial rectangle, e.g. \"[-0.5,0.5]x[-0.5,0.5]\"");
  reach->add_option("--T", f.T, "horizon");

  CLI::App* backreach =
      app.add_subcommand("backreach", "over-approximate a backward reachable set");
  add_common(backreach, f);
  backreach->add_option("--x1", f.box, "target rectangle");
  backreach->add_option("--T", f.T, "horizon");

  CLI::App* equilibrium =
      app.add_subcommand("equilibrium", "locate an embedding equilibrium");
  add_common(equilibrium, f);
  equilibrium->add_option("--method", f.method, "flow (default) or newton");
  equilibrium->add_option("--start", f.start,
                          "start (flow) or guess (newton) as a rectangle literal");
  equilibrium->add_flag("--backward", f.backward, "work on the backward embedding");

  CLI::App* certify = app.add_subcommand("certify", "issue an invariance certificate");
  add_common(certify, f);
  certify->add_option("--kind", f.kind,
                      "invariant-rect (default), attractive-rect, invariant-complement");
  certify->add_option("--witness", f.witness, "south set witness as a rectangle literal");
  certify->add_option("--tol", f.tol, "certificate slack");
  certify->add_option("--method", f.method, "equilibrium search: flow (default) or newton");
  certify->add_option("--start", f.start, "equilibrium search start");
  certify->add_option("--seed", f.seed, "seed for attractivity evidence");

  CLI::App* validate = app.add_subcommand("validate", "sample-check decomposition conditions");
  add_common(validate, f);
  validate->add_option("--samples", f.samples, "sample count");
  validate->add_option("--seed", f.seed, "sampling seed");
  validate->add_option("--test-box", f.test_box, "finite sampling box for unbounded domains");
  validate->add_flag("--backward", f.backward, "validate the backward decomposition");

  CLI::App* montecarlo =
      app.add_subcommand("montecarlo", "sample trajectories as a reachability cross-check");
  add_common(montecarlo, f);
  montecarlo->add_option("--x0", f.box, "initial rectangle");
  montecarlo->add_option("--T", f.T, "horizon");
  montecarlo->add_option("--count", f.count, "trajectory count");
  montecarlo->add_option("--seed", f.seed, "base seed");
  montecarlo->add_option("--switches", f.switches, "disturbance switch count");
  montecarlo->add_flag("--backward", f.backward, "sample the reversed dynamics");

  CLI::App* fixtures = app.add_subcommand("fixtures", "list the built-in systems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (fixtures->parsed()) {
      mmreach::list_fixtures(std::cout);
      return 0;
    }
    const CLI::App* active = nullptr;
    std::string kind;
    const std::pair<CLI::App*, const char*> table[] = {
        {reach, "reach"},     {backreach, "backreach"}, {equilibrium, "equilibrium"},
        {certify, "certify"}, {validate, "validate"},   {montecarlo, "montecarlo"}};
    for (const auto& [cmd, name] : table) {
      if (cmd->parsed()) {
        active = cmd;
        kind = name;
      }
    }
    mmreach::AnalysisConfig cfg = assemble(active, f, kind);
    return mmreach::run_and_report(cfg, std::cout, std::cerr);
  } catch (const mmreach::Error& e) {
    std::cerr << mmreach::error_name(e) << ": " << e.what() << "\n";
    return mmreach::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
