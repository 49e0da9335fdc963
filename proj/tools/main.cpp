// synthweight command-line front end.
//
// Exit codes: 0 success, 1 runtime/stage failure, 2 usage or validation error.
// Errors are reported on stderr as one JSON line: {"error": ..., "kind": ...}.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "synthweight/pipeline.hpp"

namespace fs = std::filesystem;
using namespace synthweight;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void report_error(std::string_view kind, const std::string& message, const std::string& stage = {}) {
    nlohmann::ordered_json j;
    j["error"] = message;
    j["kind"] = kind;
    if (!stage.empty()) j["stage"] = stage;
    std::cerr << j.dump() << std::endl;
}

struct SdiFlags {
    std::optional<double> lr;
    std::optional<int> epochs;
    std::optional<int> batch;
    std::optional<std::size_t> feature_dim;
    std::optional<double> l2;

    void add(CLI::App* cmd) {
        cmd->add_option("--lr", lr, "Learning rate");
        cmd->add_option("--epochs", epochs, "Training epochs");
        cmd->add_option("--batch-size", batch, "Mini-batch size");
        cmd->add_option("--feature-dim", feature_dim, "Hash buckets");
        cmd->add_option("--l2", l2, "L2 penalty");
    }
    void apply(SdiConfig& c) const {
        if (lr) c.learning_rate = *lr;
        if (epochs) c.epochs = *epochs;
        if (batch) c.batch_size = *batch;
        if (feature_dim) c.feature_dim = *feature_dim;
        if (l2) c.l2 = *l2;
    }
};

struct EncoderFlags {
    std::optional<double> lr;
    std::optional<int> epochs;
    std::optional<int> batch;
    std::optional<double> filter_fraction;
    std::optional<double> init_scale;
    std::optional<std::size_t> vocab_dim;
    std::optional<std::size_t> embed_dim;

    void add(CLI::App* cmd) {
        cmd->add_option("--lr", lr, "Learning rate");
        cmd->add_option("--epochs", epochs, "Training epochs");
        cmd->add_option("--batch-size", batch, "Mini-batch size");
        cmd->add_option("--filter-fraction", filter_fraction, "Fraction dropped by the filtering variant");
        cmd->add_option("--init-scale", init_scale, "Uniform init range");
        cmd->add_option("--vocab-dim", vocab_dim, "Token hash buckets");
        cmd->add_option("--embed-dim", embed_dim, "Embedding width");
    }
    void apply(TrainConfig& c) const {
        if (lr) c.learning_rate = *lr;
        if (epochs) c.epochs = *epochs;
        if (batch) c.batch_size = *batch;
        if (filter_fraction) c.filter_fraction = *filter_fraction;
        if (init_scale) c.init_scale = *init_scale;
        if (vocab_dim) c.vocab_dim = *vocab_dim;
        if (embed_dim) c.embed_dim = *embed_dim;
    }
};

PipelineConfig config_or_default(const std::string& path) {
    return path.empty() ? PipelineConfig{} : PipelineConfig::load(path);
}

void require_file(const std::string& path, const char* what) {
    if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " not found: " + path);
}

std::vector<Split> parse_splits(const std::string& s) {
    if (s == "all") return {Split::train, Split::dev, Split::test};
    return {parse_split(s)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Importance-weighted training on synthetic sentence pairs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(library_version()));

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate a pair file and print its split counts");
    std::string ingest_pairs;
    bool ingest_generated = false;
    ingest->add_option("pairs", ingest_pairs, "Pair file (JSON Lines)")->required();
    ingest->add_flag("--generated", ingest_generated, "Require labels in {0, 0.5, 1}");

    // gen-toy
    auto* gen = app.add_subcommand("gen-toy", "Write a toy pair file with corrupted machine sentences");
    std::string gen_in, gen_out, gen_split, gen_modes;
    std::size_t gen_count = 200;
    double gen_rate = 0.0;
    std::uint64_t gen_seed = 0;
    bool gen_noisy = false;
    gen->add_option("--pairs-in", gen_in, "Base pair file (default: generate toy pairs)");
    gen->add_option("--count", gen_count, "Number of generated base pairs")->capture_default_str();
    gen->add_option("--out", gen_out, "Output pair file")->required();
    gen->add_option("--noise-rate", gen_rate, "Fraction of machine sentences to corrupt")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
    gen->add_flag("--noisy-labels", gen_noisy, "Also flip the labels of corrupted pairs");
    gen->add_option("--split", gen_split, "Only corrupt this split (train|dev|test)");
    gen->add_option("--modes", gen_modes, "Comma-separated corruption modes");

    // train-sdi
    auto* tsdi = app.add_subcommand("train-sdi", "Train the synthetic-data classifier");
    std::string tsdi_pairs, tsdi_data, tsdi_out, tsdi_config, tsdi_source;
    std::optional<std::uint64_t> tsdi_seed;
    std::optional<double> tsdi_temp;
    SdiFlags sdi_flags;
    auto* tsdi_in = tsdi->add_option_group("input");
    tsdi_in->add_option("--pairs", tsdi_pairs, "Pair file; the train split is balanced into an SDI set");
    tsdi_in->add_option("--sdi-data", tsdi_data, "SDI file (JSON Lines: text, origin)");
    tsdi_in->require_option(1);
    tsdi->add_option("--out", tsdi_out, "Model file")->required();
    tsdi->add_option("--config", tsdi_config, "Config file providing sdi hyperparameters");
    tsdi->add_option("--seed", tsdi_seed, "Random seed");
    tsdi->add_option("--temperature", tsdi_temp, "Temperature stored in the model");
    tsdi->add_option("--source", tsdi_source, "Default temperature for a source corpus (stsb|qqp|mrpc)");
    sdi_flags.add(tsdi);

    // score
    auto* score = app.add_subcommand("score", "Write p_D for every machine sentence");
    std::string score_model, score_pairs, score_out;
    std::optional<double> score_temp;
    score->add_option("--model", score_model, "SDI model file")->required();
    score->add_option("--pairs", score_pairs, "Pair file")->required();
    score->add_option("--out", score_out, "Scores file (JSON Lines: id, p_d)")->required();
    score->add_option("--temperature", score_temp, "Override the model temperature");

    // analyze
    auto* an = app.add_subcommand("analyze", "Lexical report for human, top and bottom importance groups");
    std::string an_pairs, an_scores, an_out, an_split = "train";
    double an_fraction = 0.1;
    an->add_option("--pairs", an_pairs, "Pair file")->required();
    an->add_option("--scores", an_scores, "Scores file")->required();
    an->add_option("--fraction", an_fraction, "Group fraction in (0, 0.5]")->capture_default_str();
    an->add_option("--split", an_split, "Split to analyze (train|dev|test|all)")->capture_default_str();
    an->add_option("--out", an_out, "Directory for group_report.json and group_report.txt");

    // train-encoder
    auto* tenc = app.add_subcommand("train-encoder", "Train the sentence encoder");
    std::string tenc_pairs, tenc_scores, tenc_out, tenc_config, tenc_variant = "dino";
    std::optional<std::uint64_t> tenc_seed;
    EncoderFlags enc_flags;
    tenc->add_option("--pairs", tenc_pairs, "Pair file")->required();
    tenc->add_option("--scores", tenc_scores, "Scores file (required by rise and filtering)");
    tenc->add_option("--variant", tenc_variant, "dino|rise|filtering|random")->capture_default_str();
    tenc->add_option("--out", tenc_out, "Model file")->required();
    tenc->add_option("--config", tenc_config, "Config file providing encoder hyperparameters");
    tenc->add_option("--seed", tenc_seed, "Random seed");
    enc_flags.add(tenc);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Correlation (and thresholded) report for an encoder");
    std::string ev_model, ev_pairs, ev_out, ev_split = "test";
    ev->add_option("--model", ev_model, "Encoder model file")->required();
    ev->add_option("--pairs", ev_pairs, "Pair file")->required();
    ev->add_option("--split", ev_split, "Split to evaluate (threshold tuned on dev)")->capture_default_str();
    ev->add_option("--variant", tenc_variant, "Variant name recorded in the report");
    ev->add_option("--out", ev_out, "Write the JSON report here");

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "Run every stage and write one report directory");
    std::string pipe_config, pipe_out;
    std::optional<std::uint64_t> pipe_seed;
    std::optional<double> pipe_fraction, pipe_temp;
    std::vector<std::string> pipe_variants;
    pipe->add_option("--config", pipe_config, "Config file (JSON)")->required();
    pipe->add_option("--seed", pipe_seed, "Override the seed");
    pipe->add_option("--fraction", pipe_fraction, "Override the analysis fraction");
    pipe->add_option("--temperature", pipe_temp, "Override the SDI temperature");
    pipe->add_option("--out", pipe_out, "Override the output directory");
    pipe->add_option("--variant", pipe_variants, "Restrict to these variants (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*ingest) {
            require_file(ingest_pairs, "pairs file");
            std::cout << ingest_summary(load_pairs(ingest_pairs, ingest_generated)) << '\n';
        } else if (*gen) {
            GenToyOptions o;
            if (!gen_in.empty()) {
                require_file(gen_in, "pairs file");
                o.pairs_in = gen_in;
            }
            o.count = gen_count;
            o.out = gen_out;
            o.noise.noise_rate = gen_rate;
            o.noise.seed = gen_seed;
            o.noise.noisy_labels = gen_noisy;
            if (!gen_split.empty()) o.noise.only_split = parse_split(gen_split);
            if (!gen_modes.empty()) {
                o.noise.modes.clear();
                std::stringstream ss(gen_modes);
                for (std::string m; std::getline(ss, m, ',');) o.noise.modes.push_back(parse_corruption_mode(m));
            }
            std::cout << gen_toy(o).string() << '\n';
        } else if (*tsdi) {
            PipelineConfig base = config_or_default(tsdi_config);
            SdiConfig c = base.sdi;
            sdi_flags.apply(c);
            c.seed = tsdi_seed.value_or(base.seed);
            double temperature = base.temperature;
            if (!tsdi_source.empty()) temperature = default_temperature(tsdi_source);
            if (tsdi_temp) temperature = *tsdi_temp;
            if (!(temperature > 0.0)) throw InvalidArgument("temperature must be > 0");
            c.validate();
            std::vector<LabeledSentence> data;
            if (!tsdi_data.empty()) {
                require_file(tsdi_data, "SDI file");
                data = load_sdi_file(tsdi_data);
            } else {
                require_file(tsdi_pairs, "pairs file");
                data = derive_sdi_dataset(load_pairs(tsdi_pairs).subset(Split::train), c.seed);
            }
            SdiModel model = train_sdi(data, c);
            model.temperature = temperature;
            save_sdi_model(model, tsdi_out);
            std::printf("train_accuracy=%.2f n=%zu\n", evaluate_sdi(model, data), data.size());
        } else if (*score) {
            require_file(score_model, "SDI model");
            require_file(score_pairs, "pairs file");
            SdiModel model = load_sdi_model(score_model);
            if (score_temp) {
                if (!(*score_temp > 0.0)) throw InvalidArgument("temperature must be > 0");
                model.temperature = *score_temp;
            }
            write_scores(score_corpus(model, load_pairs(score_pairs)), score_out);
        } else if (*an) {
            require_file(an_pairs, "pairs file");
            require_file(an_scores, "scores file");
            const Corpus all = load_pairs(an_pairs);
            Corpus corpus{all.name, all.generated, {}};
            for (Split s : parse_splits(an_split)) {
                const auto part = all.subset(s);
                corpus.examples.insert(corpus.examples.end(), part.examples.begin(), part.examples.end());
            }
            const auto reports = analyze(corpus, attach_scores(corpus, load_scores(an_scores)), an_fraction);
            if (!an_out.empty()) {
                fs::create_directories(an_out);
                write_group_report(reports, an_fraction,
                                   {fs::path(an_out) / "group_report.json", fs::path(an_out) / "group_report.txt"});
            }
            std::cout << reports_to_table(reports);
        } else if (*tenc) {
            require_file(tenc_pairs, "pairs file");
            PipelineConfig base = config_or_default(tenc_config);
            TrainConfig c = base.encoder;
            enc_flags.apply(c);
            c.variant = parse_variant(tenc_variant);
            c.seed = tenc_seed.value_or(base.seed);
            c.validate();
            ScoreMap scores;
            if (!tenc_scores.empty()) {
                require_file(tenc_scores, "scores file");
                scores = load_scores(tenc_scores);
            }
            const Corpus corpus = load_pairs(tenc_pairs);
            const TrainingSet set = build_training_set(corpus, scores, c);
            TrainStats stats;
            const EncoderModel model = train_on(set, c, &stats);
            save_encoder(model, tenc_out);
            std::printf("examples_used=%zu final_loss=%.6f\n", stats.examples_used,
                        stats.epoch_losses.empty() ? 0.0 : stats.epoch_losses.back());
        } else if (*ev) {
            require_file(ev_model, "encoder model");
            require_file(ev_pairs, "pairs file");
            const EncoderModel model = load_encoder(ev_model);
            const Corpus corpus = load_pairs(ev_pairs);
            const Corpus target = corpus.subset(parse_split(ev_split));
            const Corpus dev = corpus.subset(Split::dev);
            const EvalReport report = evaluate(model, target.examples, &dev.examples);
            if (!ev_out.empty()) write_eval_report(report, parse_variant(tenc_variant), ev_out);
            std::cout << eval_summary_line(report) << '\n';
        } else if (*pipe) {
            PipelineConfig c = PipelineConfig::load(pipe_config);
            if (pipe_seed) c.seed = *pipe_seed;
            if (pipe_fraction) c.fraction = *pipe_fraction;
            if (pipe_temp) c.temperature = *pipe_temp;
            if (!pipe_out.empty()) c.out_dir = pipe_out;
            if (!pipe_variants.empty()) {
                c.variants.clear();
                for (const auto& v : pipe_variants) c.variants.push_back(parse_variant(v));
            }
            const PipelineResult r = run_pipeline(c);
            for (const auto& [variant, report] : r.evaluations) {
                std::cout << to_string(variant) << ": " << eval_summary_line(report) << '\n';
            }
            std::cout << r.manifest_path.string() << '\n';
        }
    } catch (const StageError& e) {
        report_error("stage", e.what(), e.stage());
        return kExitRuntime;
    } catch (const Error& e) {
        report_error("validation", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        report_error("runtime", e.what());
        return kExitRuntime;
    }
    return 0;
}
