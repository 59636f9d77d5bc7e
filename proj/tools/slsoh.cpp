#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "slsoh/error.hpp"
#include "slsoh/pipeline.hpp"

namespace {

using slsoh::CommandResult;
using slsoh::PipelineConfig;

int fail(int code, const std::string& kind, const std::string& message) {
  std::cerr << slsoh::error_json(code, kind, message);
  return code;
}

void report(const std::string& command, const CommandResult& r) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["written"] = r.written;
  j["warnings"] = r.warnings;
  std::cout << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second-life battery SOH pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "global seed");
  app.add_option("--out", out_dir, "artifact directory");

  const char* names[] = {"simulate", "extract", "rank", "train", "evaluate", "adaptive", "validate"};
  const char* help[] = {
      "simulate the campaign and write telemetry plus ground truth",
      "segment telemetry and write snapshots.csv",
      "rank features by mRMR on the training cells",
      "grid-search and fit the elastic-net model",
      "write train/test metrics and PCEPE reports",
      "run the adaptive estimator on each test cell",
      "check every artifact against its schema",
  };
  for (std::size_t i = 0; i < std::size(names); ++i) app.add_subcommand(names[i], help[i]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(slsoh::kExitInput, "usage", e.what());
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : PipelineConfig::from_file(config_path);
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.out_dir = *out_dir;
    cfg.validate();

    if (command == "validate") {
      const auto rep = slsoh::cmd_validate(cfg);
      std::cout << rep.to_json();
      return rep.ok() ? slsoh::kExitOk : fail(slsoh::kExitInput, "schema", "validation failed");
    }
    CommandResult r;
    if (command == "simulate") r = slsoh::cmd_simulate(cfg);
    else if (command == "extract") r = slsoh::cmd_extract(cfg);
    else if (command == "rank") r = slsoh::cmd_rank(cfg);
    else if (command == "train") r = slsoh::cmd_train(cfg);
    else if (command == "evaluate") r = slsoh::cmd_evaluate(cfg);
    else r = slsoh::cmd_adaptive(cfg);
    report(command, r);
    return slsoh::kExitOk;
  } catch (const slsoh::MissingInput& e) {
    return fail(slsoh::kExitInput, "missing_input", e.what());
  } catch (const slsoh::SchemaError& e) {
    return fail(slsoh::kExitInput, "schema", e.what());
  } catch (const slsoh::ParseError& e) {
    return fail(slsoh::kExitInput, "parse", e.what());
  } catch (const slsoh::InvalidArgument& e) {
    return fail(slsoh::kExitInput, "invalid_argument", e.what());
  } catch (const slsoh::InputError& e) {
    return fail(slsoh::kExitInput, "data", e.what());
  } catch (const std::exception& e) {
    return fail(slsoh::kExitInternal, "internal", e.what());
  }
}
