#include "doctest.h"

#include <fstream>
#include <sstream>

#include "assl/error.hpp"
#include "assl/persist.hpp"
#include "oracles.hpp"

using namespace assl;
namespace ps = assl::persist;

namespace {

data::Dataset blobs(std::size_t f, std::size_t m, std::size_t n, std::uint64_t seed) {
    data::SynthConfig sc;
    sc.num_features = f;
    sc.num_classes = m;
    sc.num_rows = n;
    sc.labeled_fraction = 1.0;
    sc.seed = seed;
    auto ds = generate_synthetic(sc).labeled;
    ds.role = data::Role::train;
    return ds;
}

// awkward values that only survive a lossless decimal encoding
void scramble(nn::MlpParams& p) {
    double v = 1.0 / 3.0;
    for (auto& layer : p.layers) {
        for (auto& w : layer.weights.values()) w = (v *= -1.0000001);
        for (auto& b : layer.bias) b = (v *= 0.9999999) * 1e-300;
    }
}

}  // namespace

TEST_SUITE("persist") {

TEST_CASE("mlp parameters round-trip bit-exactly") {
    trainer::AsslConfig cfg;
    cfg.embedding_dim = 5;
    cfg.encoder_hidden = 7;
    auto model = trainer::init_model(6, 4, cfg);
    scramble(model.encoder);
    const auto back = ps::mlp_from_json(nlohmann::json::parse(ps::to_json(model.encoder).dump()));
    CHECK(back == model.encoder);
    const auto whole = ps::assl_model_from_json(nlohmann::json::parse(ps::to_json(model).dump()));
    CHECK(whole == model);
}

TEST_CASE("gbdt and logistic models round-trip bit-exactly") {
    const auto ds = blobs(4, 3, 300, 2);
    prm::PrmConfig cfg;
    cfg.gbdt.rounds = 8;
    for (auto variant : {prm::PrmVariant::gbdt, prm::PrmVariant::logistic_regression}) {
        cfg.variant = variant;
        cfg.logreg.epochs = 30;
        const auto model = prm::train_prm(ds, cfg);
        const auto back = ps::plain_model_from_json(nlohmann::json::parse(ps::to_json(model).dump()));
        CHECK(back.variant() == variant);
        CHECK(back.predict_proba(ds.rows) == model.predict_proba(ds.rows));
        if (variant == prm::PrmVariant::gbdt) {
            CHECK(back.gbdt()->trees == model.gbdt()->trees);
            CHECK(back.gbdt()->base_score == model.gbdt()->base_score);
        } else {
            CHECK(back.logreg()->layer == model.logreg()->layer);
        }
    }
}

TEST_CASE("bundles round-trip and check the schema hash") {
    const auto ds = blobs(3, 2, 120, 4);
    const auto norm = data::fit_normalizer(ds);
    trainer::AsslConfig cfg;
    cfg.embedding_dim = 4;
    ps::ModelBundle bundle{ds.schema, norm, cfg, trainer::init_model(3, 2, cfg)};
    const auto j = nlohmann::json::parse(ps::to_json(bundle).dump());
    CHECK(j["format"] == "assl-model");
    const auto back = ps::bundle_from_json(j);
    CHECK(back.model == bundle.model);
    CHECK(back.schema == bundle.schema);
    CHECK(back.normalizer.mean == norm.mean);
    CHECK(back.normalizer.stddev == norm.stddev);
    CHECK(ps::to_json(back.config) == ps::to_json(cfg));

    auto tampered = j;
    tampered["schema_hash"] = "0000000000000000";
    CHECK_THROWS_AS(ps::bundle_from_json(tampered), DataError);
    auto other = j;
    other["format"] = "prm-model";
    CHECK_THROWS_AS(ps::bundle_from_json(other), DataError);

    prm::PrmConfig pc;
    pc.gbdt.rounds = 3;
    ps::PrmBundle pb{ds.schema, norm, prm::train_prm(norm.apply(ds), pc)};
    const auto pj = nlohmann::json::parse(ps::to_json(pb).dump());
    CHECK(pj["format"] == "prm-model");
    const auto pback = ps::prm_bundle_from_json(pj);
    CHECK(pback.model.predict_proba(ds.rows) == pb.model.predict_proba(ds.rows));
}

TEST_CASE("config readers reject unknown keys and wrong types") {
    auto j = ps::to_json(trainer::AsslConfig{});
    CHECK(ps::to_json(ps::assl_config_from_json(j)) == j);
    j["learning_rat"] = 0.1;
    CHECK_THROWS_AS(ps::assl_config_from_json(j), ConfigError);
    auto k = ps::to_json(trainer::AsslConfig{});
    k["epochs"] = "ten";
    CHECK_THROWS_AS(ps::assl_config_from_json(k), ConfigError);

    auto p = ps::to_json(prm::PrmConfig{});
    CHECK(ps::to_json(ps::prm_config_from_json(p)) == p);
    p["gbdt"]["depth"] = 2;
    CHECK_THROWS_AS(ps::prm_config_from_json(p), ConfigError);

    auto s = ps::to_json(data::SynthConfig{});
    CHECK(ps::to_json(ps::synth_config_from_json(s)) == s);
}

TEST_CASE("json files on disk") {
    oracle::TempDir dir("persist");
    const nlohmann::json j = {{"x", 0.1}, {"y", {1, 2}}};
    ps::write_json(dir / "a.json", j);
    CHECK(ps::read_json(dir / "a.json") == j);
    CHECK_THROWS_AS(ps::read_json(dir / "missing.json"), DataError);
    std::ofstream(dir / "bad.json") << "{not json";
    CHECK_THROWS_AS(ps::read_json(dir / "bad.json"), DataError);
}

TEST_CASE("history csv") {
    trainer::TrainHistory h;
    h.epochs.push_back({1, 0.5, 0.25, 1.5, 0.75, 0.125});
    std::ostringstream out;
    ps::write_history_csv(out, h);
    CHECK(out.str() == "epoch,L_L,L_U,L_adv,disc_acc,val_macro_f1\n1,0.5,0.25,1.5,0.75,0.125\n");
}

}
