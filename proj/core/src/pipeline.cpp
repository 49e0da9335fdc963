#include "synthweight/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "json_io.hpp"

namespace synthweight {

namespace fs = std::filesystem;
using detail::ordered_json;

std::string_view library_version() { return SYNTHWEIGHT_VERSION; }

namespace {

ordered_json stamp_json(const RunStamp& stamp) {
    return {{"seed", stamp.seed}, {"config_digest", stamp.config_digest}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Scores

void write_scores(const std::vector<std::pair<std::string, double>>& scores, const fs::path& path,
                  const RunStamp* stamp) {
    std::string text;
    for (const auto& [id, p_d] : scores) {
        ordered_json j;
        j["id"] = id;
        j["p_d"] = p_d;
        if (stamp) {
            j["seed"] = stamp->seed;
            j["config_digest"] = stamp->config_digest;
        }
        text += j.dump();
        text += '\n';
    }
    detail::write_text_file(path, text, "scores file");
}

ScoreMap load_scores(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scores file: " + path.string());
    ScoreMap scores;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            throw ParseError("malformed JSON", line_no);
        }
        try {
            const auto& id = detail::field(j, "id");
            if (!id.is_string()) throw ParseError("field 'id': expected string", 0);
            const double p_d = detail::number_field(j, "p_d");
            if (!(p_d >= 0.0 && p_d <= 1.0)) throw ParseError("field 'p_d': out of range [0,1]", 0);
            if (!scores.emplace(id.get<std::string>(), p_d).second) {
                throw ParseError("field 'id': duplicate id '" + id.get<std::string>() + "'", 0);
            }
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return scores;
}

std::vector<std::pair<std::string, double>> score_corpus(const SdiModel& model, const Corpus& corpus) {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(corpus.examples.size());
    for (const auto& ex : corpus.examples) out.emplace_back(ex.id, predict(model, tokenize(ex.machine_text)));
    return out;
}

std::vector<ScoredPair> attach_scores(const Corpus& corpus, const ScoreMap& scores) {
    std::vector<ScoredPair> out;
    out.reserve(corpus.examples.size());
    for (const auto& ex : corpus.examples) {
        auto it = scores.find(ex.id);
        if (it == scores.end()) throw InvalidArgument("no score for example '" + ex.id + "'");
        out.push_back({ex, it->second});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

void write_group_report(const std::vector<GroupReport>& reports, double fraction, const GroupReportFiles& files,
                        const RunStamp* stamp) {
    ordered_json j;
    if (stamp) j["run"] = stamp_json(*stamp);
    j["fraction"] = fraction;
    j["groups"] = detail::to_json(reports);
    detail::write_text_file(files.json, j.dump(2) + "\n", "group report");

    std::string table;
    if (stamp) {
        table += "# seed=" + std::to_string(stamp->seed) + " config_digest=" + stamp->config_digest + "\n";
    }
    table += reports_to_table(reports);
    detail::write_text_file(files.table, table, "group report");
}

void write_eval_report(const EvalReport& report, Variant variant, const fs::path& path, const RunStamp* stamp) {
    ordered_json j;
    if (stamp) j["run"] = stamp_json(*stamp);
    j["variant"] = to_string(variant);
    const auto body = ordered_json::parse(eval_to_json(report));
    for (const auto& [key, value] : body.items()) j[key] = value;
    j["summary"] = eval_summary_line(report);
    detail::write_text_file(path, j.dump(2) + "\n", "eval report");
}

std::string ingest_summary(const Corpus& corpus) {
    const auto counts = corpus.split_counts();
    ordered_json j;
    j["name"] = corpus.name;
    j["generated"] = corpus.generated;
    j["examples"] = corpus.examples.size();
    j["splits"] = {{"train", counts.train}, {"dev", counts.dev}, {"test", counts.test}};
    return j.dump();
}

// ---------------------------------------------------------------------------
// gen-toy

fs::path manifest_path_for(const fs::path& out) {
    fs::path p = out;
    p += ".manifest.json";
    return p;
}

fs::path gen_toy(const GenToyOptions& options) {
    const auto& noise = options.noise;
    if (!(noise.noise_rate >= 0.0 && noise.noise_rate <= 1.0)) {
        throw InvalidArgument("noise_rate must be in [0, 1]");
    }
    if (options.out.empty()) throw InvalidArgument("gen-toy: output path is required");

    Corpus base;
    if (options.pairs_in) {
        base = load_pairs(*options.pairs_in);
    } else {
        base = toy::make_pairs({options.count, noise.seed});
    }
    const auto result = toy::inject_noise(base, noise);

    write_pairs(result.corpus, options.out);

    ordered_json m;
    m["seed"] = noise.seed;
    m["noise_rate"] = noise.noise_rate;
    m["noisy_labels"] = noise.noisy_labels;
    m["source"] = options.pairs_in ? options.pairs_in->string() : "toy:" + std::to_string(options.count);
    m["examples"] = result.corpus.examples.size();
    std::vector<std::string> modes;
    for (auto mode : noise.modes) modes.emplace_back(to_string(mode));
    m["modes"] = modes;
    m["only_split"] = noise.only_split ? ordered_json(to_string(*noise.only_split)) : ordered_json(nullptr);
    ordered_json corrupted = ordered_json::array();
    std::vector<std::string> ids;
    for (const auto& c : result.corrupted) {
        corrupted.push_back({{"id", c.id}, {"mode", to_string(c.mode)}});
        ids.push_back(c.id);
    }
    m["corrupted_ids"] = ids;
    m["corrupted"] = corrupted;
    m["skipped"] = result.skipped;
    const auto path = manifest_path_for(options.out);
    detail::write_text_file(path, m.dump(2) + "\n", "gen-toy manifest");
    return path;
}

// ---------------------------------------------------------------------------
// PipelineConfig

namespace {

void require_keys(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw InvalidArgument(where + ": expected a JSON object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) throw InvalidArgument(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read_opt(const nlohmann::json& obj, const char* key, T& out, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw InvalidArgument("expected boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) throw InvalidArgument("expected integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (it->is_number_integer() && !it->is_number_unsigned()) throw InvalidArgument("must be >= 0");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number()) throw InvalidArgument("expected number");
        } else {
            if (!it->is_string()) throw InvalidArgument("expected string");
        }
        out = it->get<T>();
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(where + ": key '" + key + "': " + e.what());
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : (base / path).lexically_normal();
}

}  // namespace

PipelineConfig PipelineConfig::parse(const std::string& json_text, const fs::path& base_dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config: malformed JSON: ") + e.what(), 0);
    }
    require_keys(j,
                 {"pairs", "sdi_data", "out", "generated", "seed", "temperature", "source", "fraction", "variants",
                  "sdi", "encoder"},
                 "config");
    PipelineConfig c;
    std::string pairs, sdi_data, out, source;
    read_opt(j, "pairs", pairs, "config");
    read_opt(j, "sdi_data", sdi_data, "config");
    read_opt(j, "out", out, "config");
    read_opt(j, "source", source, "config");
    read_opt(j, "generated", c.generated, "config");
    read_opt(j, "seed", c.seed, "config");
    read_opt(j, "fraction", c.fraction, "config");
    if (!source.empty()) c.temperature = default_temperature(source);
    read_opt(j, "temperature", c.temperature, "config");
    if (!pairs.empty()) c.pairs_path = resolve(base_dir, pairs);
    if (!sdi_data.empty()) c.sdi_path = resolve(base_dir, sdi_data);
    if (!out.empty()) c.out_dir = resolve(base_dir, out);

    if (auto it = j.find("variants"); it != j.end()) {
        if (!it->is_array()) throw InvalidArgument("config: key 'variants': expected array");
        c.variants.clear();
        for (const auto& v : *it) {
            if (!v.is_string()) throw InvalidArgument("config: key 'variants': expected strings");
            c.variants.push_back(parse_variant(v.get<std::string>()));
        }
    }
    if (auto it = j.find("sdi"); it != j.end()) {
        require_keys(*it, {"learning_rate", "epochs", "batch_size", "feature_dim", "l2"}, "config.sdi");
        read_opt(*it, "learning_rate", c.sdi.learning_rate, "config.sdi");
        read_opt(*it, "epochs", c.sdi.epochs, "config.sdi");
        read_opt(*it, "batch_size", c.sdi.batch_size, "config.sdi");
        read_opt(*it, "feature_dim", c.sdi.feature_dim, "config.sdi");
        read_opt(*it, "l2", c.sdi.l2, "config.sdi");
    }
    if (auto it = j.find("encoder"); it != j.end()) {
        require_keys(*it,
                     {"learning_rate", "epochs", "batch_size", "filter_fraction", "init_scale", "vocab_dim",
                      "embed_dim"},
                     "config.encoder");
        read_opt(*it, "learning_rate", c.encoder.learning_rate, "config.encoder");
        read_opt(*it, "epochs", c.encoder.epochs, "config.encoder");
        read_opt(*it, "batch_size", c.encoder.batch_size, "config.encoder");
        read_opt(*it, "filter_fraction", c.encoder.filter_fraction, "config.encoder");
        read_opt(*it, "init_scale", c.encoder.init_scale, "config.encoder");
        read_opt(*it, "vocab_dim", c.encoder.vocab_dim, "config.encoder");
        read_opt(*it, "embed_dim", c.encoder.embed_dim, "config.encoder");
    }
    return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.parent_path());
}

void PipelineConfig::validate() const {
    if (pairs_path.empty()) throw InvalidArgument("config: pairs file is required");
    if (!fs::is_regular_file(pairs_path)) throw IoError("pairs file not found: " + pairs_path.string());
    if (sdi_path && !fs::is_regular_file(*sdi_path)) throw IoError("SDI file not found: " + sdi_path->string());
    if (out_dir.empty()) throw InvalidArgument("config: output directory is required");
    if (!(fraction > 0.0 && fraction <= 0.5)) throw InvalidArgument("config: fraction must be in (0, 0.5]");
    if (!(temperature > 0.0)) throw InvalidArgument("config: temperature must be > 0");
    if (variants.empty()) throw InvalidArgument("config: no variants requested");
    sdi.validate();
    encoder.validate();
}

namespace {

nlohmann::json config_json(const PipelineConfig& c, bool with_out) {
    nlohmann::json j;  // keys sorted
    j["pairs"] = c.pairs_path.string();
    j["sdi_data"] = c.sdi_path ? nlohmann::json(c.sdi_path->string()) : nlohmann::json(nullptr);
    if (with_out) j["out"] = c.out_dir.string();
    j["generated"] = c.generated;
    j["seed"] = c.seed;
    j["temperature"] = c.temperature;
    j["fraction"] = c.fraction;
    std::vector<std::string> variants;
    for (auto v : c.variants) variants.emplace_back(to_string(v));
    j["variants"] = variants;
    j["sdi"] = {{"learning_rate", c.sdi.learning_rate}, {"epochs", c.sdi.epochs},
                {"batch_size", c.sdi.batch_size},       {"feature_dim", c.sdi.feature_dim},
                {"l2", c.sdi.l2}};
    j["encoder"] = {{"learning_rate", c.encoder.learning_rate}, {"epochs", c.encoder.epochs},
                    {"batch_size", c.encoder.batch_size},       {"filter_fraction", c.encoder.filter_fraction},
                    {"init_scale", c.encoder.init_scale},       {"vocab_dim", c.encoder.vocab_dim},
                    {"embed_dim", c.encoder.embed_dim}};
    return j;
}

}  // namespace

std::string PipelineConfig::to_json() const { return config_json(*this, true).dump(); }

// The output directory does not influence any result, so it is left out.
std::string PipelineConfig::digest() const { return hex64(fnv1a64(config_json(*this, false).dump())); }

// ---------------------------------------------------------------------------
// run_pipeline

namespace {

class StageRunner {
public:
    StageRunner(const PipelineConfig& config, RunStamp stamp) : config_(config), stamp_(std::move(stamp)) {
        manifest_["tool"] = "synthweight";
        manifest_["version"] = library_version();
        manifest_["seed"] = stamp_.seed;
        manifest_["config_digest"] = stamp_.config_digest;
        manifest_["config"] = ordered_json::parse(config.to_json());
        manifest_["status"] = "running";
        manifest_["partial"] = true;
        manifest_["stages"] = ordered_json::array();
        manifest_["artifacts"] = ordered_json::object();
    }

    void run(const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            manifest_["stages"].push_back({{"name", name}, {"status", "failed"}});
            manifest_["status"] = "failed";
            manifest_["failed_stage"] = name;
            manifest_["error"] = e.what();
            write_manifest();
            throw StageError(name, e.what());
        }
        manifest_["stages"].push_back({{"name", name}, {"status", "ok"}});
    }

    fs::path artifact(const std::string& key, const std::string& file) {
        manifest_["artifacts"][key] = file;
        return config_.out_dir / file;
    }

    ordered_json& manifest() { return manifest_; }
    const RunStamp* stamp() const { return &stamp_; }

    fs::path finish() {
        manifest_["status"] = "ok";
        manifest_["partial"] = false;
        return write_manifest();
    }

private:
    fs::path write_manifest() {
        const auto path = config_.out_dir / "manifest.json";
        detail::write_text_file(path, manifest_.dump(2) + "\n", "run manifest");
        return path;
    }

    const PipelineConfig& config_;
    RunStamp stamp_;
    ordered_json manifest_;
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
    // Input validation: anything thrown here is a usage/validation error.
    config.validate();
    const Corpus corpus = load_pairs(config.pairs_path, config.generated);
    std::vector<LabeledSentence> sdi_file;
    if (config.sdi_path) sdi_file = load_sdi_file(*config.sdi_path);
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + config.out_dir.string() + ": " + ec.message());

    StageRunner runner(config, RunStamp{config.seed, config.digest()});
    PipelineResult result;
    const Corpus train_split = corpus.subset(Split::train);
    const Corpus dev_split = corpus.subset(Split::dev);

    std::vector<LabeledSentence> sdi_train;
    std::vector<LabeledSentence> sdi_heldout;
    runner.run("sdi-data", [&] {
        if (config.sdi_path) {
            sdi_train = sdi_file;
        } else {
            if (train_split.examples.empty()) throw InvalidArgument("train split is empty");
            sdi_train = derive_sdi_dataset(train_split, config.seed);
        }
        if (!dev_split.examples.empty()) sdi_heldout = derive_sdi_dataset(dev_split, config.seed);
    });

    SdiModel sdi;
    runner.run("train-sdi", [&] {
        SdiConfig sc = config.sdi;
        sc.seed = config.seed;
        sdi = train_sdi(sdi_train, sc);
        sdi.temperature = config.temperature;
        result.sdi_train_accuracy = evaluate_sdi(sdi, sdi_train);
        if (!sdi_heldout.empty()) result.sdi_heldout_accuracy = evaluate_sdi(sdi, sdi_heldout);
        save_sdi_model(sdi, runner.artifact("sdi_model", "sdi_model.json"), runner.stamp());
        ordered_json j;
        j["run"] = stamp_json(*runner.stamp());
        j["train_accuracy"] = result.sdi_train_accuracy;
        j["train_size"] = sdi_train.size();
        j["heldout_accuracy"] = result.sdi_heldout_accuracy ? ordered_json(*result.sdi_heldout_accuracy)
                                                           : ordered_json(nullptr);
        j["heldout_size"] = sdi_heldout.size();
        detail::write_text_file(runner.artifact("sdi_eval", "sdi_eval.json"), j.dump(2) + "\n", "SDI report");
        runner.manifest()["sdi"] = j;
    });

    ScoreMap scores;
    runner.run("score", [&] {
        const auto scored = score_corpus(sdi, corpus);
        write_scores(scored, runner.artifact("scores", "scores.jsonl"), runner.stamp());
        scores.insert(scored.begin(), scored.end());
    });

    runner.run("analyze", [&] {
        result.groups = analyze(train_split, attach_scores(train_split, scores), config.fraction);
        write_group_report(result.groups, config.fraction,
                           {runner.artifact("group_report", "group_report.json"),
                            runner.artifact("group_table", "group_report.txt")},
                           runner.stamp());
    });

    const Corpus test_split = corpus.subset(Split::test);
    for (const Variant variant : config.variants) {
        const std::string name(to_string(variant));
        EncoderModel model;
        runner.run("train-encoder:" + name, [&] {
            TrainConfig tc = config.encoder;
            tc.variant = variant;
            tc.seed = config.seed;
            TrainStats stats;
            model = train(corpus, scores, tc, &stats);
            save_encoder(model, runner.artifact("encoder_" + name, "encoder_" + name + ".bin"), runner.stamp());
            runner.manifest()["training"][name] = {{"examples_used", stats.examples_used},
                                                   {"epoch_losses", stats.epoch_losses}};
        });
        runner.run("evaluate:" + name, [&] {
            if (test_split.examples.empty()) throw InvalidArgument("test split is empty");
            const EvalReport report = evaluate(model, test_split.examples, &dev_split.examples);
            write_eval_report(report, variant, runner.artifact("eval_" + name, "eval_" + name + ".json"),
                              runner.stamp());
            result.evaluations.emplace(variant, report);
        });
    }

    result.manifest_path = runner.finish();
    return result;
}

}  // namespace synthweight
