#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "assl/pipeline.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;

    assl::pipeline::CommandOptions options() const {
        assl::pipeline::CommandOptions o;
        o.config = config;
        o.seed = seed;
        if (out) o.out = *out;
        return o;
    }
};

void add_common(CLI::App* cmd, Flags& flags) {
    cmd->add_option("-c,--config", flags.config, "JSON run config")->required();
    cmd->add_option("--seed", flags.seed, "Replace the config seed list with one seed");
    cmd->add_option("-o,--out", flags.out, "Output directory (overrides config and ASSL_OUTPUT_ROOT)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-phase adversarial semi-supervised rating classifier"};
    app.set_version_flag("--version", std::string(ASSL_VERSION));
    app.require_subcommand(1);

    Flags run_flags, ablate_flags, synth_flags;
    auto* run = app.add_subcommand("run", "Train and evaluate every configured seed");
    add_common(run, run_flags);
    auto* ablate = app.add_subcommand("ablate", "Compare PRM, supervised MLP, ASSL without and with the adversary");
    add_common(ablate, ablate_flags);
    auto* synth = app.add_subcommand("synth", "Write the configured synthetic dataset as CSV");
    add_common(synth, synth_flags);

    std::string model_path, csv_path;
    auto* predict = app.add_subcommand("predict", "Score CSV rows with a saved model");
    predict->add_option("-m,--model", model_path, "Saved model (assl_model.json or prm_model.json)")->required();
    predict->add_option("-i,--input", csv_path, "CSV file with the schema's feature columns")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : assl::pipeline::kExitConfig;
    }

    if (*run) return assl::pipeline::cmd_run(run_flags.options(), std::cout, std::cerr);
    if (*ablate) return assl::pipeline::cmd_ablate(ablate_flags.options(), std::cout, std::cerr);
    if (*synth) return assl::pipeline::cmd_synth(synth_flags.options(), std::cout, std::cerr);
    return assl::pipeline::cmd_predict(model_path, csv_path, std::cout, std::cerr);
}
