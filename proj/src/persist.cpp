#include "assl/persist.hpp"

#include <fstream>
#include <ostream>
#include <set>
#include <type_traits>

#include <fmt/format.h>

#include "assl/error.hpp"

namespace assl::persist {

namespace {

// Reads optional typed keys from a config object and rejects anything unknown.
class Reader {
public:
    Reader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
        if (!j_.is_object()) throw ConfigError(section_ + ": expected an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        // nlohmann converts between number kinds silently; a negative count must not wrap
        bool ok = true;
        if constexpr (std::is_same_v<T, bool>) {
            ok = it->is_boolean();
        } else if constexpr (std::is_unsigned_v<T>) {
            ok = it->is_number_unsigned() || (it->is_number_integer() && it->template get<std::int64_t>() >= 0);
        } else if constexpr (std::is_integral_v<T>) {
            ok = it->is_number_integer();
        } else if constexpr (std::is_floating_point_v<T>) {
            ok = it->is_number();
        }
        if (!ok) throw ConfigError(section_ + "." + key + ": wrong value type");
        try {
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw ConfigError(section_ + "." + key + ": wrong value type");
        }
    }

    template <typename T, typename Parse>
    void get_enum(const char* key, T& out, Parse parse) {
        std::string name;
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        if (!it->is_string()) throw ConfigError(section_ + "." + key + ": expected a string");
        out = parse(it->template get<std::string>());
    }

    const json* child(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(section_ + ": unknown key '" + key + "'");
        }
    }

private:
    const json& j_;
    std::string section_;
    std::set<std::string> seen_;
};

const json& field(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw DataError(std::string("model file: missing field '") + key + "'");
    return *it;
}

template <typename T>
T value(const json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const json::exception&) {
        throw DataError(std::string("model file: field '") + key + "' has the wrong type");
    }
}

}  // namespace

json to_json(const nn::MlpParams& mlp) {
    json layers = json::array();
    for (const auto& l : mlp.layers) {
        layers.push_back({{"activation", std::string(nn::to_string(l.activation))},
                          {"in_dim", l.in_dim()},
                          {"out_dim", l.out_dim()},
                          {"weights", std::vector<double>(l.weights.values().begin(), l.weights.values().end())},
                          {"bias", l.bias}});
    }
    return {{"layers", std::move(layers)}};
}

nn::MlpParams mlp_from_json(const json& j) {
    nn::MlpParams mlp;
    for (const auto& lj : field(j, "layers")) {
        const auto in = value<std::size_t>(lj, "in_dim");
        const auto out = value<std::size_t>(lj, "out_dim");
        nn::DenseLayer layer{Matrix(out, in, value<std::vector<double>>(lj, "weights")),
                             value<std::vector<double>>(lj, "bias"),
                             nn::activation_from_string(value<std::string>(lj, "activation"))};
        mlp.layers.push_back(std::move(layer));
    }
    try {
        mlp.validate();
    } catch (const ShapeError& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    return mlp;
}

json to_json(const data::DatasetSchema& schema) {
    return {{"feature_names", schema.feature_names}, {"label_names", schema.label_names}};
}

data::DatasetSchema schema_from_json(const json& j) {
    data::DatasetSchema s;
    try {
        s.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        s.label_names = j.at("label_names").get<std::vector<std::string>>();
    } catch (const json::exception&) {
        throw ConfigError("schema: expected feature_names and label_names string arrays");
    }
    s.validate();
    return s;
}

json to_json(const data::Normalizer& norm) {
    return {{"mean", norm.mean}, {"stddev", norm.stddev}, {"constant", norm.constant}};
}

data::Normalizer normalizer_from_json(const json& j) {
    data::Normalizer n{value<std::vector<double>>(j, "mean"), value<std::vector<double>>(j, "stddev"),
                       value<std::vector<bool>>(j, "constant")};
    if (n.mean.size() != n.stddev.size() || n.mean.size() != n.constant.size()) {
        throw DataError("model file: normalizer vectors differ in length");
    }
    return n;
}

json to_json(const prm::RegressionTree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
        if (n.is_leaf()) {
            nodes.push_back({{"value", n.value}});
        } else {
            nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right},
                             {"value", n.value}});
        }
    }
    return {{"num_features", tree.num_features},
            {"max_depth", tree.max_depth},
            {"min_leaf_count", tree.min_leaf_count},
            {"nodes", std::move(nodes)}};
}

prm::RegressionTree tree_from_json(const json& j) {
    prm::RegressionTree t;
    t.num_features = value<std::size_t>(j, "num_features");
    t.max_depth = value<std::size_t>(j, "max_depth");
    t.min_leaf_count = value<std::size_t>(j, "min_leaf_count");
    for (const auto& nj : field(j, "nodes")) {
        prm::TreeNode n;
        n.value = value<double>(nj, "value");
        if (nj.contains("feature")) {
            n.feature = value<int>(nj, "feature");
            n.threshold = value<double>(nj, "threshold");
            n.left = value<int>(nj, "left");
            n.right = value<int>(nj, "right");
        }
        t.nodes.push_back(n);
    }
    const auto count = static_cast<int>(t.nodes.size());
    if (count == 0) throw DataError("model file: tree has no nodes");
    for (const auto& n : t.nodes) {
        if (n.is_leaf()) continue;
        if (n.left <= 0 || n.left >= count || n.right <= 0 || n.right >= count ||
            static_cast<std::size_t>(n.feature) >= t.num_features) {
            throw DataError("model file: tree node out of range");
        }
    }
    return t;
}

json to_json(const prm::PlainModel& model) {
    json j{{"variant", std::string(prm::to_string(model.variant()))}};
    if (const auto* g = model.gbdt()) {
        json rounds = json::array();
        for (const auto& round : g->trees) {
            json r = json::array();
            for (const auto& t : round) r.push_back(to_json(t));
            rounds.push_back(std::move(r));
        }
        j["gbdt"] = {{"num_classes", g->num_classes},
                     {"num_features", g->num_features},
                     {"shrinkage", g->shrinkage},
                     {"base_score", g->base_score},
                     {"trees", std::move(rounds)}};
    } else {
        j["logreg"] = to_json(nn::MlpParams{{model.logreg()->layer}});
    }
    return j;
}

prm::PlainModel plain_model_from_json(const json& j) {
    const auto variant = prm::prm_variant_from_string(value<std::string>(j, "variant"));
    if (variant == prm::PrmVariant::logistic_regression) {
        auto mlp = mlp_from_json(field(j, "logreg"));
        if (mlp.layers.size() != 1) throw DataError("model file: logistic regression must have one layer");
        return prm::PlainModel(prm::LogRegModel{std::move(mlp.layers[0])});
    }
    const auto& gj = field(j, "gbdt");
    prm::GbdtModel g;
    g.num_classes = value<std::size_t>(gj, "num_classes");
    g.num_features = value<std::size_t>(gj, "num_features");
    g.shrinkage = value<double>(gj, "shrinkage");
    g.base_score = value<std::vector<double>>(gj, "base_score");
    if (g.base_score.size() != g.num_classes) throw DataError("model file: base_score length differs from num_classes");
    for (const auto& rj : field(gj, "trees")) {
        std::vector<prm::RegressionTree> round;
        for (const auto& tj : rj) round.push_back(tree_from_json(tj));
        if (round.size() != g.num_classes) throw DataError("model file: boosting round has wrong tree count");
        g.trees.push_back(std::move(round));
    }
    return prm::PlainModel(std::move(g));
}

json to_json(const trainer::AsslConfig& c) {
    return {{"embedding_dim", c.embedding_dim},
            {"encoder_hidden", c.encoder_hidden},
            {"head_hidden", c.head_hidden},
            {"disc_hidden", c.disc_hidden},
            {"lambda_l", c.lambda_l},
            {"lambda_u", c.lambda_u},
            {"lambda_adv", c.lambda_adv},
            {"encoder_decay", c.encoder_decay},
            {"alpha", c.alpha},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"disc_learning_rate", c.disc_learning_rate},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"adam_epsilon", c.adam_epsilon},
            {"disc_steps", c.disc_steps},
            {"gen_steps", c.gen_steps},
            {"seed", c.seed},
            {"inference_head", std::string(trainer::to_string(c.inference_head))},
            {"class_loss", std::string(trainer::to_string(c.class_loss))},
            {"suppress_pseudo", c.suppress_pseudo},
            {"use_discriminator", c.use_discriminator}};
}

trainer::AsslConfig assl_config_from_json(const json& j) {
    trainer::AsslConfig c;
    Reader r(j, "assl");
    r.get("embedding_dim", c.embedding_dim);
    r.get("encoder_hidden", c.encoder_hidden);
    r.get("head_hidden", c.head_hidden);
    r.get("disc_hidden", c.disc_hidden);
    r.get("lambda_l", c.lambda_l);
    r.get("lambda_u", c.lambda_u);
    r.get("lambda_adv", c.lambda_adv);
    r.get("encoder_decay", c.encoder_decay);
    r.get("alpha", c.alpha);
    r.get("epochs", c.epochs);
    r.get("batch_size", c.batch_size);
    r.get("learning_rate", c.learning_rate);
    r.get("disc_learning_rate", c.disc_learning_rate);
    r.get("beta1", c.beta1);
    r.get("beta2", c.beta2);
    r.get("adam_epsilon", c.adam_epsilon);
    r.get("disc_steps", c.disc_steps);
    r.get("gen_steps", c.gen_steps);
    r.get("seed", c.seed);
    r.get_enum("inference_head", c.inference_head, trainer::inference_head_from_string);
    r.get_enum("class_loss", c.class_loss, trainer::class_loss_from_string);
    r.get("suppress_pseudo", c.suppress_pseudo);
    r.get("use_discriminator", c.use_discriminator);
    r.finish();
    c.validate();
    return c;
}

json to_json(const prm::PrmConfig& c) {
    return {{"variant", std::string(prm::to_string(c.variant))},
            {"gbdt",
             {{"rounds", c.gbdt.rounds},
              {"max_depth", c.gbdt.max_depth},
              {"shrinkage", c.gbdt.shrinkage},
              {"min_leaf_count", c.gbdt.min_leaf_count}}},
            {"logreg", {{"epochs", c.logreg.epochs}, {"learning_rate", c.logreg.learning_rate}, {"l2", c.logreg.l2}}},
            {"min_confidence", c.min_confidence},
            {"seed", c.seed}};
}

prm::PrmConfig prm_config_from_json(const json& j) {
    prm::PrmConfig c;
    Reader r(j, "prm");
    r.get_enum("variant", c.variant, prm::prm_variant_from_string);
    if (const json* g = r.child("gbdt")) {
        Reader gr(*g, "prm.gbdt");
        gr.get("rounds", c.gbdt.rounds);
        gr.get("max_depth", c.gbdt.max_depth);
        gr.get("shrinkage", c.gbdt.shrinkage);
        gr.get("min_leaf_count", c.gbdt.min_leaf_count);
        gr.finish();
    }
    if (const json* l = r.child("logreg")) {
        Reader lr(*l, "prm.logreg");
        lr.get("epochs", c.logreg.epochs);
        lr.get("learning_rate", c.logreg.learning_rate);
        lr.get("l2", c.logreg.l2);
        lr.finish();
    }
    r.get("min_confidence", c.min_confidence);
    r.get("seed", c.seed);
    r.finish();
    if (!(c.gbdt.shrinkage > 0.0 && c.gbdt.shrinkage <= 1.0)) throw ConfigError("prm.gbdt.shrinkage must lie in (0, 1]");
    if (c.gbdt.min_leaf_count < 1) throw ConfigError("prm.gbdt.min_leaf_count must be >= 1");
    if (!(c.min_confidence >= 0.0 && c.min_confidence <= 1.0)) throw ConfigError("prm.min_confidence must lie in [0, 1]");
    return c;
}

json to_json(const data::SynthConfig& c) {
    return {{"num_features", c.num_features}, {"num_classes", c.num_classes},
            {"num_rows", c.num_rows},         {"labeled_fraction", c.labeled_fraction},
            {"separation", c.separation},     {"noise_std", c.noise_std},
            {"label_noise_rate", c.label_noise_rate}, {"seed", c.seed}};
}

data::SynthConfig synth_config_from_json(const json& j) {
    data::SynthConfig c;
    Reader r(j, "data.synthetic");
    r.get("num_features", c.num_features);
    r.get("num_classes", c.num_classes);
    r.get("num_rows", c.num_rows);
    r.get("labeled_fraction", c.labeled_fraction);
    r.get("separation", c.separation);
    r.get("noise_std", c.noise_std);
    r.get("label_noise_rate", c.label_noise_rate);
    r.get("seed", c.seed);
    r.finish();
    c.validate();
    return c;
}

json to_json(const trainer::AsslModel& model) {
    return {{"encoder", to_json(model.encoder)},
            {"supervised_head", to_json(model.supervised_head)},
            {"semi_head", to_json(model.semi_head)},
            {"discriminator", to_json(model.discriminator)}};
}

trainer::AsslModel assl_model_from_json(const json& j) {
    trainer::AsslModel m{mlp_from_json(field(j, "encoder")), mlp_from_json(field(j, "supervised_head")),
                         mlp_from_json(field(j, "semi_head")), mlp_from_json(field(j, "discriminator"))};
    try {
        m.validate();
    } catch (const ShapeError& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    return m;
}

std::string schema_hash_hex(const data::DatasetSchema& schema) {
    return fmt::format("{:016x}", schema.hash());
}

json to_json(const ModelBundle& b) {
    return {{"format", "assl-model"},
            {"format_version", 1},
            {"schema", to_json(b.schema)},
            {"schema_hash", schema_hash_hex(b.schema)},
            {"normalizer", to_json(b.normalizer)},
            {"config", to_json(b.config)},
            {"networks", to_json(b.model)}};
}

namespace {

data::DatasetSchema checked_schema(const json& j) {
    data::DatasetSchema schema;
    try {
        schema = schema_from_json(field(j, "schema"));
    } catch (const ConfigError& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    if (value<std::string>(j, "schema_hash") != schema_hash_hex(schema)) {
        throw DataError("model file: schema hash does not match its schema");
    }
    return schema;
}

}  // namespace

ModelBundle bundle_from_json(const json& j) {
    if (value<std::string>(j, "format") != "assl-model") throw DataError("model file: not an assl-model file");
    ModelBundle b;
    b.schema = checked_schema(j);
    b.normalizer = normalizer_from_json(field(j, "normalizer"));
    b.config = assl_config_from_json(field(j, "config"));
    b.model = assl_model_from_json(field(j, "networks"));
    if (b.model.input_dim() != b.schema.num_features() || b.model.num_classes() != b.schema.num_classes() ||
        b.normalizer.mean.size() != b.schema.num_features()) {
        throw DataError("model file: network shapes do not match the schema");
    }
    return b;
}

json to_json(const PrmBundle& b) {
    return {{"format", "prm-model"},
            {"format_version", 1},
            {"schema", to_json(b.schema)},
            {"schema_hash", schema_hash_hex(b.schema)},
            {"normalizer", to_json(b.normalizer)},
            {"model", to_json(b.model)}};
}

PrmBundle prm_bundle_from_json(const json& j) {
    if (value<std::string>(j, "format") != "prm-model") throw DataError("model file: not a prm-model file");
    PrmBundle b;
    b.schema = checked_schema(j);
    b.normalizer = normalizer_from_json(field(j, "normalizer"));
    b.model = plain_model_from_json(field(j, "model"));
    return b;
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.filename().string() + "'");
    out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.filename().string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError("'" + path.filename().string() + "' is not valid JSON: " + e.what());
    }
}

void write_history_csv(std::ostream& out, const trainer::TrainHistory& history) {
    out << "epoch,L_L,L_U,L_adv,disc_acc,val_macro_f1\n";
    for (const auto& e : history.epochs) {
        out << fmt::format("{},{},{},{},{},{}\n", e.epoch, e.l_l, e.l_u, e.l_adv, e.disc_accuracy, e.val_macro_f1);
    }
}

}  // namespace assl::persist
