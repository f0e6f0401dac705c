// Copyright 2026 The wpcr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Exit codes: 0 success, 1 a check failed under
// --strict, 2 invalid configuration, 3 numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wpcr/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool strict = false;
  std::optional<std::string> out;
};

int execute(const std::string& kind, const Flags& f) {
  using namespace wpcr;
  std::string text;
  try {
    Json config = Json::object();
    if (!f.config.empty()) {
      std::ifstream in(f.config);
      if (!in) {
        std::cerr << "wpcr: cannot open config '" << f.config << "'\n";
        return 2;
      }
      text.assign(std::istreambuf_iterator<char>(in), {});
      try {
        config = Json::parse(text);
      } catch (const Json::parse_error& e) {
        std::cerr << "wpcr: " << f.config << ": " << e.what() << '\n';
        return 2;
      }
    }
    if (f.seed) config["seed"] = *f.seed;
    if (f.threads) config["threads"] = *f.threads;
    if (f.strict) config["strict"] = true;
    if (f.out) config["out"] = *f.out;

    const ExperimentSpec spec = parse_spec(kind, config);
    const RunResult result = run(spec);
    write_outputs(spec, result);
    std::cout << result.summary.dump(2) << '\n';
    if (!result.pass) {
      log(LogLevel::kWarn, kind + ": at least one check failed");
      if (spec.strict) return 1;
    }
    return 0;
  } catch (const wpcr::Error& e) {
    const std::size_t line = locate_field(text, e.message());
    std::cerr << "wpcr: ";
    if (line > 0) std::cerr << f.config << ":" << line << ": ";
    std::cerr << e.what() << '\n';
    return wpcr::exit_code_for(e);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "wpcr: config: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein posterior contraction numerical lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", WPCR_VERSION);

  Flags flags;
  std::string chosen;
  for (const std::string& kind : wpcr::experiment_kinds()) {
    CLI::App* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    sub->add_option("--config", flags.config, "JSON experiment spec");
    sub->add_option("--seed", flags.seed, "root RNG seed");
    sub->add_option("--threads", flags.threads, "worker threads (0 = all)");
    sub->add_flag("--strict", flags.strict, "exit 1 when a check fails");
    sub->add_option("--out", flags.out, "output directory");
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return execute(chosen, flags);
}
