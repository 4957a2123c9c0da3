#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "layoutfuse_cli/commands.hpp"

using layoutfuse::cli::Format;
using layoutfuse::cli::Options;

int main(int argc, char** argv) {
  CLI::App app{"layoutfuse: cross-modal pseudo-label fusion experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LAYOUTFUSE_VERSION);

  Options opt;
  const std::map<std::string, Format> formats{{"csv", Format::kCsv}, {"json", Format::kJson}, {"both", Format::kBoth}};

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config, "project config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", opt.seed, "seed overriding the config");
    cmd->add_option("--out", opt.out, "output directory")->capture_default_str();
    cmd->add_option("--format", opt.format, "report format: csv, json or both")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  };
  auto dataset = [&](CLI::App* cmd, bool required) {
    auto* o = cmd->add_option("--dataset", opt.dataset, "dataset (JSONL)")->check(CLI::ExistingFile);
    if (required) o->required();
  };

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
  common(simulate);
  simulate->add_option("--pages", opt.pages, "page count overriding the config");

  auto* fuse = app.add_subcommand("fuse", "refine pseudo-labels of a dataset");
  common(fuse);
  dataset(fuse, true);
  fuse->add_option("--gate", opt.gate, "trained gate (JSON)");

  auto* theory = app.add_subcommand("theory", "PAC diagnostics and the sample-complexity experiment");
  common(theory);
  dataset(theory, false);
  theory->add_option("--n", opt.n, "sample count for the diagnostics (default 26000)");
  theory->add_flag("--experiment", opt.experiment, "run the sample-complexity experiment");

  auto* evaluate = app.add_subcommand("evaluate", "AP and ECE per prediction stream");
  common(evaluate);
  dataset(evaluate, true);
  evaluate->add_flag("--calibrate", opt.calibrate, "fit a temperature on even pages, report on odd pages");

  auto* compare = app.add_subcommand("compare", "paired t-test and TOST between two runs");
  common(compare);
  compare->add_option("--a", opt.a, "per-seed metrics of run A")->required()->check(CLI::ExistingFile);
  compare->add_option("--b", opt.b, "per-seed metrics of run B")->required()->check(CLI::ExistingFile);
  compare->add_option("--margin", opt.margin, "equivalence margin")->capture_default_str();
  compare->add_option("--alpha", opt.alpha, "significance level")->capture_default_str();

  auto* heuristics = app.add_subcommand("heuristics", "replace LLM regions by the rule baseline");
  common(heuristics);
  dataset(heuristics, true);

  auto* calibrate = app.add_subcommand("calibrate", "fit a temperature to one stream");
  common(calibrate);
  dataset(calibrate, true);
  calibrate->add_option("--stream", opt.stream, "teacher, llm or refined")->capture_default_str();

  auto* train = app.add_subcommand("train-gate", "train the fusion gate");
  common(train);
  dataset(train, false);
  train->add_option("--samples", opt.samples, "simulated pairs when no dataset is given")->capture_default_str();

  auto* lipschitz = app.add_subcommand("lipschitz", "empirical Lipschitz constant of a gate");
  common(lipschitz);
  dataset(lipschitz, false);
  lipschitz->add_option("--gate", opt.gate, "trained gate (JSON)")->required();

  auto* schedule = app.add_subcommand("schedule", "curriculum schedule per epoch");
  common(schedule);
  schedule->add_option("--epochs", opt.epochs, "epochs to list")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return layoutfuse::cli::execute(app.get_subcommands().front()->get_name(), opt, std::cout, std::cerr);
}
