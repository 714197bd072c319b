// Copyright 2026 The ftlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>

#include "CLI11.hpp"
#include "ftlab/cli.hpp"

int main(int argc, char **argv) {
    CLI::App app{"ftlab: fault-tolerance numerical laboratory"};
    app.set_version_flag("--version", ftlab::cli::kVersion);
    app.require_subcommand(1);

    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    std::string format;
    std::size_t workers = ftlab::default_workers();

    for (const auto &name : ftlab::cli::commands()) {
        CLI::App *sub = app.add_subcommand(name, "run the " + name + " analysis");
        sub->add_option("--config", config, "experiment config (JSON)")->required();
        sub->add_option("--seed", seed, "RNG seed; overrides the config");
        sub->add_option("--out", out, "report path; overrides the config");
        sub->add_option("--format", format, "json or csv; overrides the config")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ftlab::cli::kInvalid;
    }

    CLI::App *sub = app.get_subcommands().front();
    ftlab::cli::Overrides ov;
    ov.workers = workers;
    if (sub->count("--seed") > 0) {
        ov.seed = seed;
    }
    if (sub->count("--out") > 0) {
        ov.out = out;
    }
    if (sub->count("--format") > 0) {
        ov.format = format;
    }
    return ftlab::cli::run(sub->get_name(), config, ov, std::cout, std::cerr);
}
