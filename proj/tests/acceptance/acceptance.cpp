// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <set>
#include <string>
#include <vector>

#include "generators.hpp"
#include "oracles.hpp"
#include "synthweight/pipeline.hpp"
#include "tempdir.hpp"

using namespace synthweight;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

double rel_error(double a, double n) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
}

// The canonical toy corpus: 1000 generated pairs, 40% of the train-split
// machine sentences corrupted and given wrong labels.
std::filesystem::path canonical_pairs(const support::TempDir& dir, std::uint64_t seed) {
    GenToyOptions o;
    o.count = 1000;
    o.out = dir / ("pairs-" + std::to_string(seed) + ".jsonl");
    o.noise.noise_rate = 0.4;
    o.noise.seed = seed;
    o.noise.noisy_labels = true;
    o.noise.only_split = Split::train;
    gen_toy(o);
    return o.out;
}

PipelineConfig toy_config() {
    return PipelineConfig::load(std::filesystem::path(SYNTHWEIGHT_SOURCE_DIR) / "configs" / "toy.json");
}

// ---------------------------------------------------------------- 1

Outcome metric_oracles() {
    Rng rng(101);
    double bleu_err = 0, jac_err = 0, dist_err = 0, pear_err = 0, spear_err = 0;
    for (int i = 0; i < 200; ++i) {
        const Tokens hyp = gen::tokens(rng, 1, 14, 6), ref = gen::tokens(rng, 0, 14, 6);
        for (int n = 1; n <= 4; ++n) {
            bleu_err = std::max(bleu_err, std::abs(bleu_n(hyp, ref, n) - oracle::bleu(hyp, ref, static_cast<std::size_t>(n))));
        }
    }
    for (int i = 0; i < 200; ++i) {
        const Tokens a = gen::tokens(rng, 0, 12), b = gen::tokens(rng, 0, 12);
        jac_err = std::max(jac_err, std::abs(jaccard(a, b) - oracle::jaccard(a, b)));
    }
    for (int i = 0; i < 200; ++i) {
        std::vector<Tokens> group;
        const std::size_t size = 1 + rng.below(8);
        for (std::size_t s = 0; s < size; ++s) group.push_back(gen::tokens(rng, 3, 12, 7));
        for (int n = 1; n <= 3; ++n) {
            dist_err = std::max(dist_err, std::abs(distinct_n(group, n) - oracle::distinct(group, static_cast<std::size_t>(n))));
        }
    }
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 2 + rng.below(40);
        const bool ties = i % 2 == 0;
        const auto x = ties ? gen::grid(rng, n) : gen::reals(rng, n, -3, 3);
        const auto y = ties ? gen::grid(rng, n) : gen::reals(rng, n, -3, 3);
        pear_err = std::max(pear_err, std::abs(pearson(x, y) - oracle::pearson(x, y)));
        spear_err = std::max(spear_err, std::abs(spearman(x, y) - oracle::spearman(x, y)));
    }
    Outcome o;
    o.pass = bleu_err <= 1e-6 && jac_err <= 1e-9 && dist_err <= 1e-9 && pear_err <= 1e-9 && spear_err <= 1e-9;
    o.detail = "max abs diff bleu " + fmt("%.1e", bleu_err) + " jaccard " + fmt("%.1e", jac_err) + " distinct " +
               fmt("%.1e", dist_err) + " pearson " + fmt("%.1e", pear_err) + " spearman " + fmt("%.1e", spear_err);
    return o;
}

// ---------------------------------------------------------------- 2

Outcome zipf_recovery() {
    Outcome o;
    for (double s : {0.8, 1.0, 1.2}) {
        const double fitted = zipf_coefficient(gen::power_law(1e6, 1000, s));
        o.pass = o.pass && std::abs(fitted - s) <= 0.02;
        o.detail += "s=" + fmt("%.1f", s) + " -> " + fmt("%.4f", fitted) + "  ";
    }
    return o;
}

// ---------------------------------------------------------------- 3

Outcome rise_degeneracy() {
    Corpus corpus = toy::make_pairs({300, 3, 0.0, 0.0});
    TrainConfig cfg;
    cfg.seed = 3;
    cfg.variant = Variant::dino;
    const auto dino = train(corpus, {}, cfg);
    ScoreMap ones;
    for (const auto& ex : corpus.examples) ones[ex.id] = 1.0;
    cfg.variant = Variant::rise;
    const auto rise = train(corpus, ones, cfg);
    double max_diff = 0;
    for (std::size_t i = 0; i < dino.embeddings.size(); ++i) {
        max_diff = std::max(max_diff, std::abs(dino.embeddings[i] - rise.embeddings[i]));
    }

    // A designated pair with p_D = 0 whose tokens no other pair uses.
    corpus.examples.push_back({"designated", "quartz vellum", "zephyr obsidian", 1.0, Split::train});
    ScoreMap scores = ones;
    scores["designated"] = 0.0;
    std::set<std::size_t> shared;
    for (const auto& ex : corpus.examples) {
        if (ex.id == "designated") continue;
        for (const auto& t : tokenize(ex.human_text + " " + ex.machine_text)) shared.insert(token_bucket(t, cfg.vocab_dim));
    }
    const auto init = make_encoder(cfg.vocab_dim, cfg.embed_dim, cfg.init_scale, cfg.seed);
    const auto trained = train(corpus, scores, cfg);
    std::size_t rows = 0, moved = 0;
    for (const char* t : {"quartz", "vellum", "zephyr", "obsidian"}) {
        const auto b = token_bucket(t, cfg.vocab_dim);
        if (shared.count(b)) continue;
        ++rows;
        for (std::size_t d = 0; d < cfg.embed_dim; ++d) moved += trained.row(b)[d] != init.row(b)[d];
    }
    Outcome o;
    o.pass = max_diff <= 1e-12 && rows == 4 && moved == 0;
    o.detail = "max |rise - dino| " + fmt("%.1e", max_diff) + "; p_D=0 rows checked " + std::to_string(rows) +
               ", entries changed " + std::to_string(moved);
    return o;
}

// ---------------------------------------------------------------- 4

Outcome gradients() {
    Rng rng(404);
    const double h = 1e-5;
    double enc_worst = 0, sdi_worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        auto model = make_encoder(48, 2 + rng.below(7), 0.5, static_cast<std::uint64_t>(trial));
        std::vector<TrainingPair> batch;
        const std::size_t size = 1 + rng.below(6);
        for (std::size_t i = 0; i < size; ++i) {
            batch.push_back({gen::tokens(rng, 1, 6, 15), gen::tokens(rng, 1, 6, 15), rng.uniform01(), rng.uniform01()});
        }
        for (const auto& [bucket, g] : pair_batch_gradient(model, batch)) {
            for (std::size_t d = 0; d < model.embed_dim; ++d) {
                double& p = model.row(bucket)[d];
                const double saved = p;
                p = saved + h;
                const double up = pair_batch_loss(model, batch);
                p = saved - h;
                const double down = pair_batch_loss(model, batch);
                p = saved;
                enc_worst = std::max(enc_worst, rel_error(g[d], (up - down) / (2 * h)));
            }
        }
    }
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t dim = 8 + rng.below(32);
        SdiModel m = make_sdi_model(dim);
        for (auto& w : m.weights) w = rng.uniform(-1, 1);
        m.bias = rng.uniform(-1, 1);
        std::vector<LogisticExample> batch;
        const std::size_t size = 1 + rng.below(8);
        for (std::size_t i = 0; i < size; ++i) {
            batch.push_back({featurize(gen::tokens(rng, 1, 8), dim), static_cast<double>(rng.below(2))});
        }
        const double l2 = rng.uniform(0, 1e-2);
        std::vector<double> gw;
        double gb = 0;
        logistic_gradient(m, batch, l2, gw, gb);
        for (std::size_t k = 0; k <= dim; ++k) {
            double& p = k < dim ? m.weights[k] : m.bias;
            const double saved = p;
            p = saved + h;
            const double up = logistic_loss(m, batch, l2);
            p = saved - h;
            const double down = logistic_loss(m, batch, l2);
            p = saved;
            sdi_worst = std::max(sdi_worst, rel_error(k < dim ? gw[k] : gb, (up - down) / (2 * h)));
        }
    }
    Outcome o;
    o.pass = enc_worst <= 1e-4 && sdi_worst <= 1e-4;
    o.detail = "worst relative error encoder " + fmt("%.1e", enc_worst) + " sdi " + fmt("%.1e", sdi_worst) +
               " (50 trials each)";
    return o;
}

// ---------------------------------------------------------------- 5

// 500 human toy sentences against 500 corrupt() outputs; 400 + 400 train,
// the remaining 100 + 100 held out.
Outcome sdi_separability() {
    Outcome o;
    o.detail = "held-out accuracy:";
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto sentences = toy::make_sentences(1000, seed);
        const std::vector<CorruptionMode> modes(kAllCorruptionModes.begin(), kAllCorruptionModes.end());
        Rng rng(seed * 77);
        std::vector<LabeledSentence> train, heldout;
        for (std::size_t i = 0; i < 500; ++i) {
            auto& target = i < 400 ? train : heldout;
            target.push_back({sentences[i], Origin::human});
            target.push_back({corrupt(sentences[500 + i], rng.pick(modes), seed * 1000 + i), Origin::machine});
        }
        rng.shuffle(train);
        SdiConfig cfg;
        cfg.seed = seed;
        cfg.learning_rate = 20;
        cfg.epochs = 40;
        const double acc = evaluate_sdi(train_sdi(train, cfg), heldout);
        o.pass = o.pass && acc >= 95.0;
        o.detail += " " + fmt("%.1f", acc);
    }
    o.detail += " (seeds 1-5, lr 20, 40 epochs)";
    return o;
}

// ---------------------------------------------------------------- 6

struct Direction {
    GroupReport top, bottom;
    bool holds() const {
        return bottom.distinct_mean < top.distinct_mean && bottom.bleu_mean < top.bleu_mean &&
               bottom.jaccard < top.jaccard;
    }
};

// The pipeline's sdi-data, train-sdi, score and analyze stages.
Direction scored_groups(const PipelineConfig& config, const std::filesystem::path& pairs) {
    const Corpus train = load_pairs(pairs, true).subset(Split::train);
    SdiConfig sc = config.sdi;
    sc.seed = config.seed;
    SdiModel model = train_sdi(derive_sdi_dataset(train, config.seed), sc);
    model.temperature = config.temperature;
    ScoreMap scores;
    for (const auto& [id, p] : score_corpus(model, train)) scores[id] = p;
    const auto reports = analyze(train, attach_scores(train, scores), config.fraction);
    return {reports[1], reports[2]};
}

Outcome table_direction() {
    support::TempDir dir;
    PipelineConfig config = toy_config();
    const Direction d = scored_groups(config, canonical_pairs(dir, config.seed));
    Outcome o;
    o.pass = d.holds();
    o.detail = "top/bottom Distinct-N " + fmt("%.2f", d.top.distinct_mean) + "/" + fmt("%.2f", d.bottom.distinct_mean) +
               " BLEU-N " + fmt("%.2f", d.top.bleu_mean) + "/" + fmt("%.2f", d.bottom.bleu_mean) + " Jaccard " +
               fmt("%.2f", d.top.jaccard) + "/" + fmt("%.2f", d.bottom.jaccard);

    // Other corpus seeds, reported only.
    std::string per_seed;
    for (std::uint64_t seed = 2; seed <= 5; ++seed) {
        config.seed = seed;
        const Direction other = scored_groups(config, canonical_pairs(dir, seed));
        per_seed += std::string(" ") + std::to_string(seed) + ":" +
                    (other.bottom.distinct_mean < other.top.distinct_mean ? "D" : "-") +
                    (other.bottom.bleu_mean < other.top.bleu_mean ? "B" : "-") +
                    (other.bottom.jaccard < other.top.jaccard ? "J" : "-");
    }
    o.detail += "; other corpus seeds (D/B/J direction held):" + per_seed;
    return o;
}

// ---------------------------------------------------------------- 7

Outcome rise_benefit() {
    int wins = 0;
    double sum[4] = {0, 0, 0, 0};
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Corpus base = toy::make_pairs({500, seed, 0.1, 0.2});
        toy::NoiseOptions noise;
        noise.noise_rate = 0.4;
        noise.seed = seed;
        noise.noisy_labels = true;
        noise.only_split = Split::train;
        const Corpus corpus = toy::inject_noise(base, noise).corpus;

        SdiConfig sc;
        sc.learning_rate = 5;
        sc.epochs = 10;
        sc.seed = seed;
        SdiModel sdi = train_sdi(derive_sdi_dataset(corpus.subset(Split::train), seed), sc);
        sdi.temperature = 0.5;
        ScoreMap scores;
        for (const auto& [id, p] : score_corpus(sdi, corpus)) scores[id] = p;

        const auto test = corpus.subset(Split::test).examples;
        double rho[4];
        for (int v = 0; v < 4; ++v) {
            TrainConfig tc;
            tc.variant = static_cast<Variant>(v);
            tc.seed = seed;
            tc.learning_rate = 2;
            tc.epochs = 10;
            rho[v] = evaluate(train(corpus, scores, tc), test).spearman;
            sum[v] += rho[v];
        }
        wins += rho[1] > rho[0];
        per_seed += " " + fmt("%.3f", rho[1]) + "/" + fmt("%.3f", rho[0]);
    }
    Outcome o;
    o.pass = wins >= 4 && sum[1] > sum[0];
    o.detail = "RISE beats DINO on " + std::to_string(wins) + "/5 seeds; rise/dino rho:" + per_seed +
               "; mean rho dino " + fmt("%.3f", sum[0] / 5) + " rise " + fmt("%.3f", sum[1] / 5) + " filtering " +
               fmt("%.3f", sum[2] / 5) + " random " + fmt("%.3f", sum[3] / 5);
    return o;
}

// ---------------------------------------------------------------- 8

Outcome threshold_optimality() {
    Rng rng(808);
    int agree = 0;
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 2 + rng.below(49);
        auto labels = gen::binary(rng, n);
        labels[0] = 0;
        labels[1] = 1;
        rng.shuffle(labels);
        const auto preds = i % 2 ? gen::grid(rng, n, 8) : gen::reals(rng, n);
        const double t = select_threshold(preds, labels);
        agree += oracle::f1_at(preds, labels, t) == oracle::best_threshold(preds, labels).f1;
    }
    return {agree == 500, std::to_string(agree) + "/500 instances reach the brute-force F1 maximum"};
}

// ---------------------------------------------------------------- 9

// Largest numeric difference between two JSON documents of the same shape;
// infinity when shapes, keys or non-numeric values differ.
double max_difference(const nlohmann::json& a, const nlohmann::json& b) {
    if (a.is_number() && b.is_number()) return std::abs(a.get<double>() - b.get<double>());
    if (a.type() != b.type() || a.size() != b.size()) return INFINITY;
    if (a.is_object()) {
        double worst = 0;
        for (auto it = a.begin(); it != a.end(); ++it) {
            if (!b.contains(it.key())) return INFINITY;
            worst = std::max(worst, max_difference(it.value(), b[it.key()]));
        }
        return worst;
    }
    if (a.is_array()) {
        double worst = 0;
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, max_difference(a[i], b[i]));
        return worst;
    }
    return a == b ? 0.0 : INFINITY;
}

nlohmann::json read_reports(const std::filesystem::path& dir) {
    nlohmann::json all;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        std::ifstream in(entry.path());
        if (entry.path().extension() == ".json") {
            all[name] = nlohmann::json::parse(in);
        } else if (entry.path().extension() == ".jsonl") {
            std::string line;
            while (std::getline(in, line)) all[name].push_back(nlohmann::json::parse(line));
        }
    }
    return all;
}

Outcome determinism() {
    support::TempDir dir;
    PipelineConfig config = toy_config();
    config.pairs_path = canonical_pairs(dir, config.seed);
    config.out_dir = dir / "run";
    const auto first = run_pipeline(config);
    const auto a = read_reports(config.out_dir);
    std::filesystem::remove_all(config.out_dir);
    const auto second = run_pipeline(config);
    const auto b = read_reports(config.out_dir);
    const double diff = max_difference(a, b);
    double eval_diff = 0;
    for (const auto& [variant, report] : first.evaluations) {
        const auto& other = second.evaluations.at(variant);
        eval_diff = std::max({eval_diff, std::abs(report.pearson - other.pearson),
                              std::abs(report.spearman - other.spearman)});
    }
    Outcome o;
    o.pass = a.size() >= 9 && diff <= 1e-9 && eval_diff <= 1e-9;
    o.detail = std::to_string(a.size()) + " report files compared, max metric difference " + fmt("%.1e", diff);
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_seconds;  // 0: no runtime limit
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "metric oracle equivalence", 10, metric_oracles},
        {2, "zipf recovery", 5, zipf_recovery},
        {3, "rise/dino degeneracy", 0, rise_degeneracy},
        {4, "gradient correctness", 30, gradients},
        {5, "sdi separability", 60, sdi_separability},
        {6, "group report direction", 60, table_direction},
        {7, "rise benefit", 300, rise_benefit},
        {8, "threshold optimality", 0, threshold_optimality},
        {9, "pipeline determinism", 0, determinism},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_seconds > 0 && seconds > c.limit_seconds) {
            o.pass = false;
            o.detail += "; over the " + fmt("%.0f", c.limit_seconds) + " s limit";
        }
        failed += !o.pass;
        std::printf("[%s] %d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
