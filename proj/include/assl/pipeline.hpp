#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"  // nlohmann/json

#include "assl/data.hpp"
#include "assl/metrics.hpp"
#include "assl/prm.hpp"
#include "assl/trainer.hpp"

namespace assl::pipeline {

struct CsvSource {
    std::filesystem::path labeled;
    std::optional<std::filesystem::path> unlabeled;
    data::MissingPolicy missing_policy = data::MissingPolicy::reject;
};

struct Ablation {
    bool baseline_supervised_only = false;  // pseudo rows never enter Phase II
    bool no_adversarial = false;            // alpha = 0
    bool no_semi = false;                   // lambda_u = 0
};

struct RunConfig {
    std::optional<data::SynthConfig> synthetic;
    std::optional<CsvSource> csv;
    data::DatasetSchema schema;
    prm::PrmConfig prm;
    trainer::AsslConfig assl;
    std::array<double, 3> split{0.8, 0.1, 0.1};  // train, validation, test over the labeled rows
    std::vector<std::uint64_t> seeds{0};
    std::string output_dir;  // empty: $ASSL_OUTPUT_ROOT, then "runs"
    Ablation ablation;

    // Phase-II config after the ablation flags and the run seed are applied.
    trainer::AsslConfig effective_assl(std::uint64_t seed) const;
};

// Relative csv paths resolve against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical snapshot; the output directory is not part of it.
nlohmann::json to_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

struct LoadedData {
    data::Dataset labeled;
    data::Dataset unlabeled;
};

LoadedData load_data(const RunConfig& cfg);

struct PreparedData {
    data::Dataset raw_test;  // unnormalized, as written to test_split.csv
    data::Dataset train;
    data::Dataset validation;
    data::Dataset test;
    data::Dataset unlabeled;
    data::Normalizer normalizer;
    std::vector<std::string> warnings;
};

// Split the labeled pool, fit the normalizer on the training rows only and
// apply it everywhere.
PreparedData prepare(const LoadedData& loaded, const RunConfig& cfg, std::uint64_t seed,
                     data::AuditLog* audit = nullptr);

struct PhaseOne {
    prm::PlainModel model;
    prm::PseudoLabeledDataset pseudo;
};

PhaseOne run_phase_one(const PreparedData& prepared, const RunConfig& cfg, std::uint64_t seed,
                       data::AuditLog* audit = nullptr);

struct SeedOutcome {
    std::uint64_t seed = 0;
    trainer::TrainResult assl;
    std::vector<int> test_predictions;
    Matrix test_proba;
    eval::MetricsReport report;
};

SeedOutcome run_phase_two(const PreparedData& prepared, const PhaseOne& phase_one, const trainer::AsslConfig& cfg,
                          std::uint64_t seed, data::AuditLog* audit = nullptr);

eval::MetricsReport evaluate_prm(const prm::PlainModel& model, const data::Dataset& test);

std::filesystem::path output_root(const RunConfig& cfg);

struct CommandOptions {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
};

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitDivergence = 4;

// Each command reports failures as a single line on `err`:
//   error kind=<config|data|divergence> code=<n> message="..."
int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_ablate(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_predict(const std::filesystem::path& model_path, const std::filesystem::path& csv_path, std::ostream& out,
                std::ostream& err);
int cmd_synth(const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace assl::pipeline
