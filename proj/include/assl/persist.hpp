#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"  // nlohmann/json

#include "assl/data.hpp"
#include "assl/nn.hpp"
#include "assl/prm.hpp"
#include "assl/trainer.hpp"

// JSON persistence. Doubles are written with 17 significant digits, so every
// value round-trips bit-exactly.
namespace assl::persist {

using nlohmann::json;

json to_json(const nn::MlpParams& mlp);
nn::MlpParams mlp_from_json(const json& j);

json to_json(const data::DatasetSchema& schema);
data::DatasetSchema schema_from_json(const json& j);

json to_json(const data::Normalizer& norm);
data::Normalizer normalizer_from_json(const json& j);

json to_json(const prm::RegressionTree& tree);
prm::RegressionTree tree_from_json(const json& j);

json to_json(const prm::PlainModel& model);
prm::PlainModel plain_model_from_json(const json& j);

// Config sections. Readers start from defaults, reject unknown keys and
// values of the wrong type with ConfigError.
json to_json(const trainer::AsslConfig& cfg);
trainer::AsslConfig assl_config_from_json(const json& j);
json to_json(const prm::PrmConfig& cfg);
prm::PrmConfig prm_config_from_json(const json& j);
json to_json(const data::SynthConfig& cfg);
data::SynthConfig synth_config_from_json(const json& j);

json to_json(const trainer::AsslModel& model);
trainer::AsslModel assl_model_from_json(const json& j);

// A Phase-II model together with everything needed to score raw CSV rows.
struct ModelBundle {
    data::DatasetSchema schema;
    data::Normalizer normalizer;
    trainer::AsslConfig config;
    trainer::AsslModel model;
};

json to_json(const ModelBundle& bundle);
ModelBundle bundle_from_json(const json& j);

struct PrmBundle {
    data::DatasetSchema schema;
    data::Normalizer normalizer;
    prm::PlainModel model;
};

json to_json(const PrmBundle& bundle);
PrmBundle prm_bundle_from_json(const json& j);

std::string schema_hash_hex(const data::DatasetSchema& schema);

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

// epoch,L_L,L_U,L_adv,disc_acc,val_macro_f1
void write_history_csv(std::ostream& out, const trainer::TrainHistory& history);

}  // namespace assl::persist
