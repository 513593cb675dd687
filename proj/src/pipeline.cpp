#include "assl/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "assl/error.hpp"
#include "assl/persist.hpp"
#include "assl/rng.hpp"

#ifndef ASSL_VERSION
#define ASSL_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace assl::pipeline {

namespace {

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(section + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.count(key)) throw ConfigError(section + ": unknown key '" + key + "'");
    }
}

template <typename T>
T get_as(const json& j, const std::string& what) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(what + ": wrong value type");
    }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string one_line(std::string text) {
    for (auto& c : text) {
        if (c == '"') c = '\'';
        if (c == '\n' || c == '\r') c = ' ';
    }
    return text;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    const auto fail = [&](const char* kind, int code, const std::string& message, const std::string& extra = {}) {
        err << "error kind=" << kind << " code=" << code << extra << " message=\"" << one_line(message) << "\"\n";
        return code;
    };
    try {
        return fn();
    } catch (const ConfigError& e) {
        return fail("config", kExitConfig, e.what());
    } catch (const DivergenceError& e) {
        return fail("divergence", kExitDivergence, e.what(), " term=" + e.term());
    } catch (const DataError& e) {
        return fail("data", kExitData, e.what());
    } catch (const ShapeError& e) {
        return fail("data", kExitData, e.what());
    } catch (const fs::filesystem_error& e) {
        return fail("data", kExitData, "filesystem: " + e.code().message());
    }
}

std::string run_dir_name(std::uint64_t seed, std::size_t index, const std::vector<std::uint64_t>& seeds) {
    std::size_t count = 0;
    for (auto s : seeds) count += s == seed;
    return count > 1 ? fmt::format("seed_{}_{}", seed, index) : fmt::format("seed_{}", seed);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.filename().string() + "'");
    out << text;
}

void write_predictions(const fs::path& path, const Matrix& proba, const std::vector<int>& labels,
                       const data::DatasetSchema& schema) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.filename().string() + "'");
    out << "row,rating";
    for (const auto& name : schema.label_names) out << ",p_" << name;
    out << '\n';
    for (std::size_t r = 0; r < proba.rows(); ++r) {
        out << r << ',' << schema.label_names[static_cast<std::size_t>(labels[r])];
        for (double p : proba.row(r)) out << ',' << fmt::format("{}", p);
        out << '\n';
    }
}

std::vector<int> argmax_rows(const Matrix& proba) {
    std::vector<int> labels(proba.rows());
    for (std::size_t r = 0; r < proba.rows(); ++r) labels[r] = static_cast<int>(prm::argmax(proba.row(r)));
    return labels;
}

}  // namespace

trainer::AsslConfig RunConfig::effective_assl(std::uint64_t seed) const {
    trainer::AsslConfig c = assl;
    c.seed = seed;
    if (ablation.baseline_supervised_only) {
        c.suppress_pseudo = true;
        c.inference_head = trainer::InferenceHead::supervised;  // the semi head is never trained
    }
    if (ablation.no_adversarial) c.alpha = 0.0;
    if (ablation.no_semi) c.lambda_u = 0.0;
    return c;
}

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
    check_keys(j, "config", {"data", "schema", "prm", "assl", "split", "seeds", "output_dir", "ablation"});
    RunConfig cfg;

    if (!j.contains("data")) throw ConfigError("config: missing 'data' section");
    const json& dj = j["data"];
    check_keys(dj, "data", {"synthetic", "csv"});
    if (dj.contains("synthetic") == dj.contains("csv")) {
        throw ConfigError("data: exactly one of 'synthetic' or 'csv' is required");
    }
    if (dj.contains("synthetic")) {
        cfg.synthetic = persist::synth_config_from_json(dj["synthetic"]);
    } else {
        const json& cj = dj["csv"];
        check_keys(cj, "data.csv", {"labeled", "unlabeled", "missing_policy"});
        if (!cj.contains("labeled")) throw ConfigError("data.csv: missing 'labeled'");
        CsvSource src;
        const auto resolve = [&](const json& v, const char* key) {
            fs::path p = get_as<std::string>(v, std::string("data.csv.") + key);
            return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        };
        src.labeled = resolve(cj["labeled"], "labeled");
        if (cj.contains("unlabeled")) src.unlabeled = resolve(cj["unlabeled"], "unlabeled");
        if (cj.contains("missing_policy")) {
            src.missing_policy =
                data::missing_policy_from_string(get_as<std::string>(cj["missing_policy"], "data.csv.missing_policy"));
        }
        cfg.csv = std::move(src);
    }

    if (j.contains("schema")) {
        const json& sj = j["schema"];
        if (sj.is_string()) {
            const auto name = sj.get<std::string>();
            if (name != "credit_default") throw ConfigError("schema: unknown preset '" + name + "'");
            cfg.schema = data::DatasetSchema::credit_default();
        } else {
            check_keys(sj, "schema", {"feature_names", "label_names"});
            try {
                cfg.schema = persist::schema_from_json(sj);
            } catch (const DataError& e) {
                throw ConfigError(std::string("schema: ") + e.what());
            }
        }
    } else if (cfg.synthetic) {
        cfg.schema = data::DatasetSchema::generic(cfg.synthetic->num_features, cfg.synthetic->num_classes);
    } else {
        cfg.schema = data::DatasetSchema::credit_default();
    }
    if (cfg.synthetic && (cfg.schema.num_features() != cfg.synthetic->num_features ||
                          cfg.schema.num_classes() != cfg.synthetic->num_classes)) {
        throw ConfigError("schema: size differs from data.synthetic num_features/num_classes");
    }

    if (j.contains("prm")) cfg.prm = persist::prm_config_from_json(j["prm"]);
    if (j.contains("assl")) cfg.assl = persist::assl_config_from_json(j["assl"]);

    if (j.contains("split")) {
        const auto v = get_as<std::vector<double>>(j["split"], "split");
        if (v.size() != 3) throw ConfigError("split: expected [train, validation, test]");
        double total = 0.0;
        for (double f : v) {
            if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("split: fractions must lie in [0, 1]");
            total += f;
        }
        if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split: fractions must sum to 1");
        if (v[0] <= 0.0) throw ConfigError("split: train fraction must be positive");
        cfg.split = {v[0], v[1], v[2]};
    }
    if (j.contains("seeds")) {
        if (j["seeds"].is_array()) {
            for (const auto& v : j["seeds"]) {
                if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) throw ConfigError("seeds: expected non-negative integers");
            }
        }
        cfg.seeds = get_as<std::vector<std::uint64_t>>(j["seeds"], "seeds");
        if (cfg.seeds.empty()) throw ConfigError("seeds: at least one seed is required");
    }
    if (j.contains("output_dir")) cfg.output_dir = get_as<std::string>(j["output_dir"], "output_dir");
    if (j.contains("ablation")) {
        const json& aj = j["ablation"];
        check_keys(aj, "ablation", {"baseline_supervised_only", "no_adversarial", "no_semi"});
        if (aj.contains("baseline_supervised_only")) {
            cfg.ablation.baseline_supervised_only =
                get_as<bool>(aj["baseline_supervised_only"], "ablation.baseline_supervised_only");
        }
        if (aj.contains("no_adversarial")) cfg.ablation.no_adversarial = get_as<bool>(aj["no_adversarial"], "ablation.no_adversarial");
        if (aj.contains("no_semi")) cfg.ablation.no_semi = get_as<bool>(aj["no_semi"], "ablation.no_semi");
    }
    if (!cfg.synthetic && !cfg.csv->unlabeled && !cfg.ablation.baseline_supervised_only) {
        throw ConfigError("data.csv: 'unlabeled' is required unless ablation.baseline_supervised_only is set");
    }
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.filename().string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path.filename().string() + "' is not valid JSON: " + e.what());
    }
    return parse_run_config(j, path.parent_path());
}

json to_json(const RunConfig& cfg) {
    json data;
    if (cfg.synthetic) {
        data["synthetic"] = persist::to_json(*cfg.synthetic);
    } else {
        json c{{"labeled", cfg.csv->labeled.string()},
               {"missing_policy", cfg.csv->missing_policy == data::MissingPolicy::reject ? "reject" : "mean_impute"}};
        if (cfg.csv->unlabeled) c["unlabeled"] = cfg.csv->unlabeled->string();
        data["csv"] = std::move(c);
    }
    return {{"data", std::move(data)},
            {"schema", persist::to_json(cfg.schema)},
            {"prm", persist::to_json(cfg.prm)},
            {"assl", persist::to_json(cfg.assl)},
            {"split", cfg.split},
            {"seeds", cfg.seeds},
            {"ablation",
             {{"baseline_supervised_only", cfg.ablation.baseline_supervised_only},
              {"no_adversarial", cfg.ablation.no_adversarial},
              {"no_semi", cfg.ablation.no_semi}}}};
}

std::string config_hash(const RunConfig& cfg) {
    return fmt::format("{:016x}", fnv1a(to_json(cfg).dump()));
}

LoadedData load_data(const RunConfig& cfg) {
    LoadedData out;
    if (cfg.synthetic) {
        auto synth = data::generate_synthetic(*cfg.synthetic);
        out.labeled = std::move(synth.labeled);
        out.unlabeled = std::move(synth.unlabeled);
        out.labeled.schema = cfg.schema;
        out.unlabeled.schema = cfg.schema;
    } else {
        out.labeled = data::load_csv(cfg.csv->labeled, cfg.schema, cfg.csv->missing_policy);
        if (!out.labeled.labeled()) throw DataError("labeled csv has no 'rating' column");
        if (cfg.csv->unlabeled) {
            out.unlabeled = data::load_csv(*cfg.csv->unlabeled, cfg.schema, cfg.csv->missing_policy);
            out.unlabeled.labels.reset();
        } else {
            out.unlabeled = data::Dataset{cfg.schema, Matrix(0, cfg.schema.num_features()), std::nullopt,
                                          data::Role::unlabeled};
        }
    }
    if (out.labeled.size() == 0) throw DataError("labeled data is empty");
    out.labeled.role = data::Role::pool;
    out.unlabeled.role = data::Role::unlabeled;
    return out;
}

PreparedData prepare(const LoadedData& loaded, const RunConfig& cfg, std::uint64_t seed, data::AuditLog* audit) {
    auto split = data::stratified_split(loaded.labeled, cfg.split, seed, audit);
    PreparedData p;
    p.normalizer = data::fit_normalizer(split.train, audit);
    p.train = p.normalizer.apply(split.train);
    p.validation = p.normalizer.apply(split.validation);
    p.test = p.normalizer.apply(split.test);
    p.unlabeled = p.normalizer.apply(loaded.unlabeled);
    p.raw_test = std::move(split.test);
    p.warnings = std::move(split.warnings);
    return p;
}

PhaseOne run_phase_one(const PreparedData& prepared, const RunConfig& cfg, std::uint64_t seed, data::AuditLog* audit) {
    prm::PrmConfig pc = cfg.prm;
    pc.seed = seed;
    PhaseOne out;
    out.model = prm::train_prm(prepared.train, pc, audit);
    if (audit) audit->record("pseudo_label", prepared.unlabeled.role, false);
    out.pseudo = prm::pseudo_label(out.model, prepared.unlabeled, pc.min_confidence);
    return out;
}

SeedOutcome run_phase_two(const PreparedData& prepared, const PhaseOne& phase_one, const trainer::AsslConfig& cfg,
                          std::uint64_t seed, data::AuditLog* audit) {
    SeedOutcome out;
    out.seed = seed;
    out.assl = trainer::train(prepared.train, phase_one.pseudo, prepared.validation, cfg, {}, audit);
    if (audit) audit->record("evaluate", prepared.test.role, true);
    out.test_proba = trainer::predict_proba(out.assl.model, prepared.test.rows, cfg.inference_head);
    out.test_predictions = argmax_rows(out.test_proba);
    out.report = eval::evaluate(prepared.test.require_labels(), out.test_predictions,
                                prepared.test.schema.num_classes());
    return out;
}

eval::MetricsReport evaluate_prm(const prm::PlainModel& model, const data::Dataset& test) {
    const auto proba = model.predict_proba(test.rows);
    return eval::evaluate(test.require_labels(), argmax_rows(proba), test.schema.num_classes());
}

fs::path output_root(const RunConfig& cfg) {
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("ASSL_OUTPUT_ROOT"); env && *env) return env;
    return "runs";
}

namespace {

RunConfig load_with_overrides(const CommandOptions& opts) {
    RunConfig cfg = load_run_config(opts.config);
    if (opts.seed) cfg.seeds = {*opts.seed};
    if (opts.out) cfg.output_dir = opts.out->string();
    return cfg;
}

}  // namespace

int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto started = Clock::now();
        const RunConfig cfg = load_with_overrides(opts);
        const LoadedData loaded = load_data(cfg);

        const std::string hash = config_hash(cfg);
        const fs::path dir = output_root(cfg) / hash;
        fs::create_directories(dir);
        persist::write_json(dir / "config.json", to_json(cfg));

        json runs = json::array();
        std::vector<eval::MetricsReport> reports;
        for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
            const std::uint64_t seed = cfg.seeds[i];
            const std::string name = run_dir_name(seed, i, cfg.seeds);
            const fs::path run_dir = dir / name;
            fs::create_directories(run_dir);
            json timings;

            auto t = Clock::now();
            data::AuditLog audit;
            const PreparedData prepared = prepare(loaded, cfg, seed, &audit);
            for (const auto& w : prepared.warnings) err << "warning seed=" << seed << " message=\"" << one_line(w) << "\"\n";
            timings["prepare"] = seconds_since(t);

            t = Clock::now();
            const PhaseOne phase_one = run_phase_one(prepared, cfg, seed, &audit);
            timings["phase_one"] = seconds_since(t);

            t = Clock::now();
            const auto acfg = cfg.effective_assl(seed);
            const SeedOutcome outcome = run_phase_two(prepared, phase_one, acfg, seed, &audit);
            timings["phase_two"] = seconds_since(t);

            t = Clock::now();
            const auto& schema = cfg.schema;
            persist::write_json(run_dir / "prm_model.json",
                                persist::to_json(persist::PrmBundle{schema, prepared.normalizer, phase_one.model}));
            persist::write_json(run_dir / "assl_model.json",
                                persist::to_json(persist::ModelBundle{schema, prepared.normalizer, acfg, outcome.assl.model}));
            {
                std::ofstream h(run_dir / "history.csv");
                persist::write_history_csv(h, outcome.assl.history);
            }
            persist::write_json(run_dir / "report.json", eval::to_json(outcome.report, schema.label_names));
            write_text(run_dir / "report.txt", eval::format_report(outcome.report, schema.label_names));
            persist::write_json(run_dir / "prm_report.json",
                                eval::to_json(evaluate_prm(phase_one.model, prepared.test), schema.label_names));
            data::save_csv(run_dir / "test_split.csv", prepared.raw_test);
            write_predictions(run_dir / "test_predictions.csv", outcome.test_proba, outcome.test_predictions, schema);
            timings["write"] = seconds_since(t);

            json artifacts;
            for (const char* f : {"prm_model.json", "assl_model.json", "history.csv", "report.json", "report.txt",
                                  "prm_report.json", "test_split.csv", "test_predictions.csv"}) {
                artifacts[f] = name + "/" + f;
            }
            runs.push_back({{"seed", seed},
                            {"dir", name},
                            {"best_epoch", outcome.assl.best_epoch},
                            {"pseudo_labeled_rows", phase_one.pseudo.size()},
                            {"artifacts", std::move(artifacts)},
                            {"timings_seconds", std::move(timings)}});
            reports.push_back(outcome.report);
            out << fmt::format("seed {:>6}  accuracy {:.5f}  macro_p {:.5f}  macro_r {:.5f}  macro_f1 {:.5f}\n", seed,
                               outcome.report.accuracy, outcome.report.macro_precision, outcome.report.macro_recall,
                               outcome.report.macro_f1);
        }

        json manifest{{"version", ASSL_VERSION},
                      {"command", "run"},
                      {"config_hash", hash},
                      {"config", to_json(cfg)},
                      {"config_file", "config.json"},
                      {"runs", std::move(runs)}};
        if (reports.size() >= 2) {
            const auto agg = eval::aggregate_runs(reports);
            persist::write_json(dir / "aggregate.json", eval::to_json(agg));
            write_text(dir / "aggregate.txt", eval::format_aggregate(agg));
            manifest["aggregate"] = {{"json", "aggregate.json"}, {"text", "aggregate.txt"}};
            out << eval::format_aggregate(agg);
        }
        manifest["total_seconds"] = seconds_since(started);
        persist::write_json(dir / "manifest.json", manifest);
        out << "output " << hash << '\n';
        return kExitOk;
    });
}

int cmd_ablate(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto started = Clock::now();
        const RunConfig cfg = load_with_overrides(opts);
        const LoadedData loaded = load_data(cfg);

        const std::string hash = config_hash(cfg);
        const fs::path dir = output_root(cfg) / hash / "ablate";
        fs::create_directories(dir);

        const std::vector<std::string> variants{"prm", "mlp", "assl_no_adv", "assl_full"};
        std::map<std::string, std::vector<eval::MetricsReport>> by_variant;
        json rows = json::array();
        std::string table = fmt::format("{:<12} {:>8}  {:>9}  {:>9}  {:>9}  {:>9}\n", "variant", "seed", "accuracy",
                                        "macro_p", "macro_r", "macro_f1");

        for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
            const std::uint64_t seed = cfg.seeds[i];
            const std::string run_name = run_dir_name(seed, i, cfg.seeds);
            const PreparedData prepared = prepare(loaded, cfg, seed);
            for (const auto& w : prepared.warnings) err << "warning seed=" << seed << " message=\"" << one_line(w) << "\"\n";
            const PhaseOne phase_one = run_phase_one(prepared, cfg, seed);

            for (const auto& variant : variants) {
                const auto t = Clock::now();
                eval::MetricsReport report;
                if (variant == "prm") {
                    report = evaluate_prm(phase_one.model, prepared.test);
                } else {
                    trainer::AsslConfig acfg = cfg.assl;
                    acfg.seed = seed;
                    if (variant == "mlp") {
                        acfg.suppress_pseudo = true;
                        acfg.inference_head = trainer::InferenceHead::supervised;
                    }
                    if (variant == "assl_no_adv") acfg.alpha = 0.0;
                    report = run_phase_two(prepared, phase_one, acfg, seed).report;
                }
                const fs::path rel = fs::path(variant) / run_name / "report.json";
                fs::create_directories(dir / rel.parent_path());
                const json rj = eval::to_json(report, cfg.schema.label_names);
                persist::write_json(dir / rel, rj);
                rows.push_back({{"variant", variant},
                                {"seed", seed},
                                {"report", rel.generic_string()},
                                {"metrics", eval::headline_metrics(report)},
                                {"seconds", seconds_since(t)}});
                table += fmt::format("{:<12} {:>8}  {:>9.5f}  {:>9.5f}  {:>9.5f}  {:>9.5f}\n", variant, seed,
                                     report.accuracy, report.macro_precision, report.macro_recall, report.macro_f1);
                by_variant[variant].push_back(report);
            }
        }

        json aggregates = json::object();
        if (cfg.seeds.size() >= 2) {
            table += '\n';
            table += fmt::format("{:<12} {:>8}  {:>18}  {:>18}\n", "variant", "runs", "accuracy", "macro_f1");
            for (const auto& variant : variants) {
                const auto agg = eval::aggregate_runs(by_variant[variant]);
                aggregates[variant] = eval::to_json(agg);
                const auto& acc = agg.metrics.at("accuracy");
                const auto& f1 = agg.metrics.at("macro_f1");
                table += fmt::format("{:<12} {:>8}  {:>9.5f} ± {:<6.4f}  {:>9.5f} ± {:<6.4f}\n", variant, agg.runs,
                                     acc.mean, acc.stddev, f1.mean, f1.stddev);
            }
        }

        persist::write_json(dir / "ablation.json", {{"rows", rows}, {"aggregates", aggregates}});
        write_text(dir / "ablation.txt", table);
        persist::write_json(dir / "manifest.json", {{"version", ASSL_VERSION},
                                                    {"command", "ablate"},
                                                    {"config_hash", hash},
                                                    {"config", to_json(cfg)},
                                                    {"table", {{"json", "ablation.json"}, {"text", "ablation.txt"}}},
                                                    {"total_seconds", seconds_since(started)}});
        out << table;
        out << "output " << hash << "/ablate\n";
        return kExitOk;
    });
}

int cmd_predict(const fs::path& model_path, const fs::path& csv_path, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const json j = persist::read_json(model_path);
        const auto format = j.is_object() && j.contains("format") && j["format"].is_string()
                                ? j["format"].get<std::string>()
                                : std::string();
        data::DatasetSchema schema;
        data::Normalizer normalizer;
        std::optional<persist::ModelBundle> assl_bundle;
        std::optional<persist::PrmBundle> prm_bundle;
        if (format == "assl-model") {
            assl_bundle = persist::bundle_from_json(j);
            schema = assl_bundle->schema;
            normalizer = assl_bundle->normalizer;
        } else if (format == "prm-model") {
            prm_bundle = persist::prm_bundle_from_json(j);
            schema = prm_bundle->schema;
            normalizer = prm_bundle->normalizer;
        } else {
            throw DataError("model file: unrecognized format");
        }

        const auto input = data::load_csv(csv_path, schema, data::MissingPolicy::reject);
        if (input.size() == 0) return kExitOk;
        const Matrix x = normalizer.apply(input.rows);
        const Matrix proba = assl_bundle ? trainer::predict_proba(assl_bundle->model, x, assl_bundle->config.inference_head)
                                         : prm_bundle->model.predict_proba(x);
        std::string text;
        for (std::size_t r = 0; r < proba.rows(); ++r) {
            text += schema.label_names[prm::argmax(proba.row(r))];
            for (double p : proba.row(r)) text += fmt::format(",{}", p);
            text += '\n';
        }
        out << text;
        return kExitOk;
    });
}

int cmd_synth(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = load_run_config(opts.config);
        if (!cfg.synthetic) throw ConfigError("synth: config has no data.synthetic section");
        data::SynthConfig sc = *cfg.synthetic;
        if (opts.seed) sc.seed = *opts.seed;
        const auto synth = data::generate_synthetic(sc);
        const fs::path dir = opts.out ? *opts.out : output_root(cfg) / fmt::format("synth_{}", config_hash(cfg));
        fs::create_directories(dir);

        data::Dataset labeled = synth.labeled;
        data::Dataset unlabeled = synth.unlabeled;
        labeled.schema = unlabeled.schema = cfg.schema;
        data::Dataset truth = unlabeled;
        truth.labels = synth.hidden_truth;
        data::save_csv(dir / "labeled.csv", labeled);
        data::save_csv(dir / "unlabeled.csv", unlabeled);
        data::save_csv(dir / "unlabeled_truth.csv", truth);
        out << fmt::format("labeled {} rows, unlabeled {} rows\n", labeled.size(), unlabeled.size());
        return kExitOk;
    });
}

}  // namespace assl::pipeline
