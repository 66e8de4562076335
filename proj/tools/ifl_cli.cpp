#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ifl/ifl.h"

namespace {

struct Args {
    std::string config;
    std::string out;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
};

int run(const std::string& kind, const Args& args)
{
    int exit_code = 0;
    char* summary = nullptr;
    const ifl_status st = ifl_run_experiment(kind.c_str(), args.config.c_str(), args.out.empty() ? nullptr : args.out.c_str(),
                                             args.threads, args.seed.has_value(), args.seed.value_or(0), &exit_code,
                                             &summary);
    if (st != IFL_OK) {
        std::cerr << "ifl " << kind << ": " << ifl_status_string(st) << ": " << ifl_last_error() << '\n';
        return (st == IFL_CONFIG_ERROR || st == IFL_INVALID_ARGUMENT) ? 1 : 2;
    }
    if (summary) {
        std::cout << summary;
        ifl_string_free(summary);
    }
    return exit_code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quenched interface model experiments"};
    app.set_version_flag("--version", std::string(ifl_version()));
    app.require_subcommand(1);

    Args args;
    std::string chosen;
    for (const char* kind : {"gaussian-scaling", "testfn-scaling", "tail-check", "oracle-validate"}) {
        CLI::App* sub = app.add_subcommand(kind, std::string("run the ") + kind + " experiment");
        sub->add_option("--config", args.config, "INI config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", args.out, "output directory (overrides experiment.output)");
        sub->add_option("--threads", args.threads, "worker threads")->check(CLI::Range(1u, 1024u));
        sub->add_option("--seed", args.seed, "master seed (overrides disorder.seed)");
        sub->callback([&chosen, kind] { chosen = kind; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    return run(chosen, args);
}
