// suzz_cli: sample | efficiency | compare | diagnose | oracle1d
//
// Exit codes: 0 ok, 2 configuration error, 3 runtime or assumption error.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "suzz/suzz.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out, target, speed, observable, input;
  std::optional<std::uint64_t> switches, chains;
  std::optional<double> time, delta;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "key = value config file");
  sub->add_option("--seed", o.seed, "master seed (u64)");
  sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--target", o.target, "normal1d | exp1d | student:<nu> | cauchy5d");
  sub->add_option("--speed", o.speed, "unit | poly:<eps>");
  sub->add_option("--observable", o.observable, "x | sgnlog | auto");
  sub->add_option("--switches", o.switches, "run until N switches");
  sub->add_option("--time", o.time, "run until time T");
  sub->add_option("--chains", o.chains, "number of chains (seeds)");
  sub->add_option("--delta", o.delta, "skeleton spacing");
}

suzz::experiment::ExperimentConfig resolve(const std::string& section, const Overrides& o) {
  suzz::io::Config cfg;
  if (!o.config.empty()) cfg = suzz::io::Config::load(o.config);
  auto put = [&](const std::string& key, const std::string& v) { cfg.set(section + "." + key, v); };
  if (o.seed) put("seed", std::to_string(*o.seed));
  if (o.threads) put("threads", std::to_string(*o.threads));
  if (o.out) put("out", *o.out);
  if (o.target) put("target", *o.target);
  if (o.speed) put("speed", *o.speed);
  if (o.observable) put("observable", *o.observable);
  if (o.input) put("input", *o.input);
  if (o.switches) put("switches", std::to_string(*o.switches));
  if (o.time) put("time", suzz::io::format_double(*o.time));
  if (o.chains) put("chains", std::to_string(*o.chains));
  if (o.delta) put("delta", suzz::io::format_double(*o.delta));
  return suzz::experiment::load_config(cfg, section);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speed-up Zig-Zag sampler: experiments, efficiency tables and diagnostics"};
  app.require_subcommand(1);
  Overrides o;
  auto* sample = app.add_subcommand("sample", "run chains; write events, skeletons and a summary");
  auto* efficiency = app.add_subcommand("efficiency", "inverse efficiency table by quadrature");
  auto* compare = app.add_subcommand("compare", "ESS (and cube occupation) over an algorithm grid");
  auto* diagnose = app.add_subcommand("diagnose", "ESS, KS and Q-Q data of a skeleton CSV");
  auto* oracle = app.add_subcommand("oracle1d", "direct SUZZ vs transformed Zig-Zag in one dimension");
  for (auto* s : {sample, efficiency, compare, diagnose, oracle}) add_common(s, o);
  diagnose->add_option("--input", o.input, "skeleton CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    namespace ex = suzz::experiment;
    if (sample->parsed()) {
      ex::cmd_sample(resolve("sample", o), std::cout);
    } else if (efficiency->parsed()) {
      ex::cmd_efficiency(resolve("efficiency", o), std::cout);
    } else if (compare->parsed()) {
      ex::cmd_compare(resolve("compare", o), std::cout);
    } else if (diagnose->parsed()) {
      ex::cmd_diagnose(resolve("diagnose", o), std::cout);
    } else if (oracle->parsed()) {
      ex::cmd_oracle1d(resolve("oracle1d", o), std::cout);
    }
  } catch (const suzz::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
