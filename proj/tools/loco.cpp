// Command-line front end: loco gen | train | eval | props.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "loco/commands.hpp"
#include "loco/parallel.hpp"

namespace {

template <typename T>
void adopt(std::optional<T>& slot, const CLI::Option* opt, const T& value) {
  if (opt->count() > 0) slot = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event localization from occurrence counts"};
  app.require_subcommand(1);

  std::string config, out, data, checkpoint, fault;
  std::uint64_t seed = 0;
  std::size_t tolerance = 0, trials = 0;
  double threshold = 0.0;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  auto* train = app.add_subcommand("train", "Train a model on count labels");
  auto* eval = app.add_subcommand("eval", "Localize events and score them against hidden truth");
  auto* props = app.add_subcommand("props", "Run the randomized invariant suites");

  for (auto* sub : {gen, train, eval, props}) {
    sub->add_option("--seed", seed, "Seed override");
  }
  for (auto* sub : {gen, train, eval}) {
    sub->add_option("--config", config, "Configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory");
  }
  for (auto* sub : {train, eval}) sub->add_option("--data", data, "Dataset directory");
  eval->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  eval->add_option("--tolerance", tolerance, "Matching tolerance in steps");
  eval->add_option("--threshold", threshold, "Decoding threshold");
  props->add_option("--trials", trials, "Random trials per property");
  props->add_option("--inject-fault", fault, "Deliberately broken implementation")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : loco::cli::kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  loco::cli::CommandOptions opts;
  opts.threads = loco::thread_count_from_env();
  opts.inject_fault = fault;
  adopt(opts.seed, sub->get_option("--seed"), seed);
  if (sub != props) {
    if (!config.empty()) opts.config = config;
    if (!out.empty()) opts.out = out;
  }
  if (!data.empty()) opts.data = data;
  if (!checkpoint.empty()) opts.checkpoint = checkpoint;
  if (sub == eval) {
    adopt(opts.tolerance, sub->get_option("--tolerance"), tolerance);
    adopt(opts.threshold, sub->get_option("--threshold"), threshold);
  }
  if (sub == props) adopt(opts.trials, sub->get_option("--trials"), trials);

  if (sub == gen) return loco::cli::cmd_gen(opts, std::cout, std::cerr);
  if (sub == train) return loco::cli::cmd_train(opts, std::cout, std::cerr);
  if (sub == eval) return loco::cli::cmd_eval(opts, std::cout, std::cerr);
  return loco::cli::cmd_props(opts, std::cout, std::cerr);
}
