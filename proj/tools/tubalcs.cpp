// Copyright 2026 The tubalcs Authors.
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

// tubalcs run | selftest | gen

#include <charconv>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tubalcs/harness.hpp"
#include "tubalcs/io.hpp"
#include "tubalcs/selftest.hpp"

namespace {

// "n1=20,n2=400,n3=20,r=4,kappa=2,seed=1"
tubalcs::GroundTruthSpec parse_spec(const std::string& text) {
  tubalcs::GroundTruthSpec spec;
  std::vector<std::string> errors;
  for (auto item : tubalcs::detail::split_list(text)) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back("expected key=value, got '" + std::string(item) + "'");
      continue;
    }
    const auto key = tubalcs::detail::trim(item.substr(0, eq));
    const auto value = tubalcs::detail::trim(item.substr(eq + 1));
    bool ok = true;
    if (key == "n1") {
      ok = tubalcs::detail::parse_number(value, spec.n1);
    } else if (key == "n2") {
      ok = tubalcs::detail::parse_number(value, spec.n2);
    } else if (key == "n3") {
      ok = tubalcs::detail::parse_number(value, spec.n3);
    } else if (key == "r") {
      ok = tubalcs::detail::parse_number(value, spec.r);
    } else if (key == "kappa") {
      ok = tubalcs::detail::parse_number(value, spec.kappa);
    } else if (key == "seed") {
      ok = tubalcs::detail::parse_number(value, spec.seed);
    } else {
      errors.push_back("unknown key '" + std::string(key) + "'");
      continue;
    }
    if (!ok) errors.push_back("bad value for '" + std::string(key) + "'");
  }
  if (!errors.empty()) throw tubalcs::ParseError(std::move(errors));
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-tubal-rank tensor recovery from local compressed sensing"};
  app.require_subcommand(1);

  std::string config_path;
  tubalcs::RunOptions opts;
  bool no_timing = false;
  auto* run = app.add_subcommand("run", "Run the experiment sweep of a config file");
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--out", opts.out_dir, "Output directory");
  run->add_option("--threads", opts.threads, "Concurrent (run, seed) pairs")
      ->check(CLI::PositiveNumber);
  run->add_flag("--no-timing", no_timing,
                "Write elapsed_ms as 0 so reruns are byte-identical");

  std::uint64_t selftest_seed = 7;
  auto* selftest = app.add_subcommand("selftest", "Oracle and invariant checks");
  selftest->add_option("--seed", selftest_seed, "Seed of the random instances");

  std::string spec_text, gen_out;
  auto* gen = app.add_subcommand("gen", "Write a synthetic ground truth (TNS3)");
  gen->add_option("--spec", spec_text, "n1=..,n2=..,n3=..,r=..,kappa=..,seed=..")
      ->required();
  gen->add_option("--out", gen_out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      opts.record_time = !no_timing;
      const auto cfg = tubalcs::load_config(config_path);
      const auto report = tubalcs::run_experiment(cfg, opts);
      for (const auto& row : report.rows) {
        std::cout << row.variant << " kappa=" << row.kappa << " seed=" << row.seed
                  << " iters=" << row.iterations
                  << " rel_err=" << tubalcs::format_double(row.final_rel_err)
                  << '\n';
      }
      std::cout << "wrote " << (opts.out_dir / "summary.csv").string() << '\n';
    } else if (*selftest) {
      return tubalcs::report_selftest(std::cout,
                                      tubalcs::run_selftest(selftest_seed))
                 ? 0
                 : 1;
    } else if (*gen) {
      const auto spec = parse_spec(spec_text);
      tubalcs::io::save_tensor(gen_out, tubalcs::generate_ground_truth(spec));
    }
  } catch (const tubalcs::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  return 0;
}
