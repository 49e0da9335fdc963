#include "synthweight/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "json_io.hpp"
#include "synthweight/metrics.hpp"

namespace synthweight {

std::string_view to_string(Variant variant) {
    switch (variant) {
        case Variant::dino: return "dino";
        case Variant::rise: return "rise";
        case Variant::filtering: return "filtering";
        case Variant::random: return "random";
    }
    return "dino";
}

Variant parse_variant(std::string_view name) {
    if (name == "dino") return Variant::dino;
    if (name == "rise") return Variant::rise;
    if (name == "filtering") return Variant::filtering;
    if (name == "random") return Variant::random;
    throw InvalidArgument("unknown variant '" + std::string(name) + "' (expected dino|rise|filtering|random)");
}

void EncoderModel::validate() const {
    if (vocab_dim < 2) throw InvalidArgument("EncoderModel: vocab_dim must be >= 2");
    if (embed_dim < 2) throw InvalidArgument("EncoderModel: embed_dim must be >= 2");
    if (embeddings.size() != vocab_dim * embed_dim) {
        throw InvalidArgument("EncoderModel: embedding matrix size != vocab_dim * embed_dim");
    }
}

EncoderModel make_encoder(std::size_t vocab_dim, std::size_t embed_dim, double init_scale,
                          std::uint64_t seed) {
    EncoderModel m;
    m.vocab_dim = vocab_dim;
    m.embed_dim = embed_dim;
    m.embeddings.assign(vocab_dim * embed_dim, 0.0);
    m.validate();
    Rng rng(derive_seed(seed, "encoder/init"));
    for (double& v : m.embeddings) v = rng.uniform(-init_scale, init_scale);
    return m;
}

std::size_t token_bucket(std::string_view token, std::size_t vocab_dim) {
    return static_cast<std::size_t>(fnv1a64(token) % vocab_dim);
}

std::vector<double> embed(const EncoderModel& model, const Tokens& tokens) {
    std::vector<double> e(model.embed_dim, 0.0);
    if (tokens.empty()) return e;
    for (const auto& t : tokens) {
        const auto r = model.row(token_bucket(t, model.vocab_dim));
        for (std::size_t k = 0; k < model.embed_dim; ++k) e[k] += r[k];
    }
    const double inv = 1.0 / static_cast<double>(tokens.size());
    for (double& v : e) v *= inv;
    return e;
}

namespace {

constexpr double kMinNorm = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

struct PairForward {
    std::vector<double> e1, e2;
    double n1 = 0.0, n2 = 0.0;
    double cos = 0.0;  // unclamped
    bool degenerate = true;
};

PairForward forward(const EncoderModel& model, const TrainingPair& p) {
    PairForward f;
    f.e1 = embed(model, p.first);
    f.e2 = embed(model, p.second);
    f.n1 = std::sqrt(dot(f.e1, f.e1));
    f.n2 = std::sqrt(dot(f.e2, f.e2));
    if (f.n1 < kMinNorm || f.n2 < kMinNorm) return f;
    f.degenerate = false;
    f.cos = dot(f.e1, f.e2) / (f.n1 * f.n2);
    return f;
}

double clamp_unit(double c) { return std::clamp(c, -1.0, 1.0); }

// Adds scale * d(cos)/d(e_self) / |tokens| to every row used by `tokens`.
void scatter(const EncoderModel& model, const Tokens& tokens, const std::vector<double>& self,
             const std::vector<double>& other, double n_self, double n_other, double cos,
             double scale, RowGradients& grad) {
    const double a = 1.0 / (n_self * n_other);
    const double b = cos / (n_self * n_self);
    const double per_token = scale / static_cast<double>(tokens.size());
    for (const auto& t : tokens) {
        auto& g = grad[token_bucket(t, model.vocab_dim)];
        if (g.empty()) g.assign(model.embed_dim, 0.0);
        for (std::size_t k = 0; k < model.embed_dim; ++k) {
            g[k] += per_token * (a * other[k] - b * self[k]);
        }
    }
}

}  // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("cosine: length mismatch (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    }
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na < kMinNorm || nb < kMinNorm) return 0.0;
    return clamp_unit(dot(a, b) / (na * nb));
}

double predict_similarity(const EncoderModel& model, const Tokens& first, const Tokens& second) {
    return cosine(embed(model, first), embed(model, second));
}

double example_weight(Variant variant, double p_d, double u) {
    switch (variant) {
        case Variant::dino:
        case Variant::filtering: return 1.0;
        case Variant::rise: return p_d;
        case Variant::random: return u;
    }
    return 1.0;
}

double batch_loss(std::span<const double> preds, std::span<const double> labels,
                  std::span<const double> weights) {
    if (preds.size() != labels.size() || preds.size() != weights.size()) {
        throw InvalidArgument("batch_loss: length mismatch");
    }
    if (preds.empty()) throw InvalidArgument("batch_loss: empty batch");
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (!(weights[i] >= 0.0 && weights[i] <= 1.0)) {
            throw InvalidArgument("batch_loss: weight outside [0, 1]");
        }
        const double r = preds[i] - labels[i];
        sum += weights[i] * r * r;
    }
    return sum / static_cast<double>(preds.size());
}

double pair_batch_loss(const EncoderModel& model, std::span<const TrainingPair> batch) {
    std::vector<double> preds, labels, weights;
    for (const auto& p : batch) {
        const auto f = forward(model, p);
        preds.push_back(f.degenerate ? 0.0 : clamp_unit(f.cos));
        labels.push_back(p.label);
        weights.push_back(p.weight);
    }
    return batch_loss(preds, labels, weights);
}

RowGradients pair_batch_gradient(const EncoderModel& model, std::span<const TrainingPair> batch) {
    RowGradients grad;
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (const auto& p : batch) {
        if (p.weight == 0.0) continue;
        const auto f = forward(model, p);
        if (f.degenerate) continue;
        const double dloss = 2.0 * inv_b * p.weight * (clamp_unit(f.cos) - p.label);
        scatter(model, p.first, f.e1, f.e2, f.n1, f.n2, f.cos, dloss, grad);
        scatter(model, p.second, f.e2, f.e1, f.n2, f.n1, f.cos, dloss, grad);
    }
    return grad;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw InvalidArgument("TrainConfig: learning_rate must be > 0");
    if (batch_size < 1) throw InvalidArgument("TrainConfig: batch_size must be >= 1");
    if (epochs < 1) throw InvalidArgument("TrainConfig: epochs must be >= 1");
    if (!(filter_fraction > 0.0 && filter_fraction <= 0.5)) {
        throw InvalidArgument("TrainConfig: filter_fraction must be in (0, 0.5]");
    }
    if (!(init_scale > 0.0)) throw InvalidArgument("TrainConfig: init_scale must be > 0");
    if (vocab_dim < 2) throw InvalidArgument("TrainConfig: vocab_dim must be >= 2");
    if (embed_dim < 2) throw InvalidArgument("TrainConfig: embed_dim must be >= 2");
}

TrainingSet build_training_set(const Corpus& corpus, const ScoreMap& scores, const TrainConfig& config) {
    config.validate();
    const Corpus train_split = corpus.subset(Split::train);
    if (train_split.examples.empty()) throw InvalidArgument("train: the train split is empty");

    const bool needs_scores = config.variant == Variant::rise || config.variant == Variant::filtering;
    std::vector<double> importance(train_split.examples.size(), 1.0);
    if (needs_scores) {
        for (std::size_t i = 0; i < train_split.examples.size(); ++i) {
            const auto& id = train_split.examples[i].id;
            auto it = scores.find(id);
            if (it == scores.end()) {
                throw InvalidArgument("train: missing importance score for '" + id + "' (variant " +
                                      std::string(to_string(config.variant)) + ")");
            }
            if (!(it->second >= 0.0 && it->second <= 1.0)) {
                throw InvalidArgument("train: importance score for '" + id + "' outside [0, 1]");
            }
            importance[i] = it->second;
        }
    }

    // Drawn for every pair regardless of variant so the stream is stable.
    Rng weight_rng(derive_seed(config.seed, "encoder/random-weights"));
    std::vector<double> uniform(train_split.examples.size());
    for (double& u : uniform) u = weight_rng.uniform01();

    std::vector<bool> keep(train_split.examples.size(), true);
    if (config.variant == Variant::filtering) {
        std::vector<ScoredPair> scored;
        scored.reserve(train_split.examples.size());
        for (std::size_t i = 0; i < train_split.examples.size(); ++i) {
            scored.push_back({train_split.examples[i], importance[i]});
        }
        const auto order = importance_order(scored);
        const std::size_t drop =
            std::min(importance_group_size(scored.size(), config.filter_fraction), scored.size());
        for (std::size_t k = scored.size() - drop; k < scored.size(); ++k) keep[order[k]] = false;
    }

    TrainingSet set;
    for (std::size_t i = 0; i < train_split.examples.size(); ++i) {
        if (!keep[i]) continue;
        const auto& ex = train_split.examples[i];
        set.ids.push_back(ex.id);
        set.pairs.push_back({tokenize(ex.human_text), tokenize(ex.machine_text), ex.label,
                             example_weight(config.variant, importance[i], uniform[i])});
    }
    return set;
}

EncoderModel train_on(const TrainingSet& set, const TrainConfig& config, TrainStats* stats) {
    config.validate();
    if (set.pairs.empty()) throw InvalidArgument("train: no training pairs");
    EncoderModel model = make_encoder(config.vocab_dim, config.embed_dim, config.init_scale, config.seed);
    if (stats) {
        stats->examples_used = set.pairs.size();
        stats->epoch_losses.assign(1, pair_batch_loss(model, set.pairs));
    }

    std::vector<std::size_t> order(set.pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, "encoder/epoch-shuffle"));
    const auto batch_size = static_cast<std::size_t>(config.batch_size);
    std::vector<TrainingPair> batch;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            batch.clear();
            for (std::size_t k = start; k < end; ++k) batch.push_back(set.pairs[order[k]]);
            const RowGradients grad = pair_batch_gradient(model, batch);
            for (const auto& [r, g] : grad) {
                auto row = model.row(r);
                for (std::size_t k = 0; k < model.embed_dim; ++k) row[k] -= config.learning_rate * g[k];
            }
        }
        if (stats) stats->epoch_losses.push_back(pair_batch_loss(model, set.pairs));
    }
    return model;
}

EncoderModel train(const Corpus& corpus, const ScoreMap& scores, const TrainConfig& config,
                   TrainStats* stats) {
    return train_on(build_training_set(corpus, scores, config), config, stats);
}

namespace {

constexpr std::string_view kEncoderMagic = "SWENC1";

}  // namespace

void save_encoder(const EncoderModel& model, const std::filesystem::path& path, const RunStamp* stamp) {
    model.validate();
    detail::ordered_json header;
    header["format"] = "synthweight.encoder";
    header["format_version"] = model.format_version;
    header["vocab_dim"] = model.vocab_dim;
    header["embed_dim"] = model.embed_dim;
    header["layout"] = "row-major";
    header["dtype"] = "float64-le";
    if (stamp) header["run"] = {{"seed", stamp->seed}, {"config_digest", stamp->config_digest}};

    auto out = detail::open_output(path, "encoder model");
    out << kEncoderMagic << '\n' << header.dump() << '\n';
    static_assert(std::endian::native == std::endian::little, "encoder files are little-endian");
    out.write(reinterpret_cast<const char*>(model.embeddings.data()),
              static_cast<std::streamsize>(model.embeddings.size() * sizeof(double)));
    if (!out) throw IoError("write failed: " + path.string());
}

EncoderModel load_encoder(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open encoder model: " + path.string());
    std::string magic, header_line;
    if (!std::getline(in, magic) || magic != kEncoderMagic) {
        throw ParseError("encoder model " + path.string() + ": bad magic", 0);
    }
    if (!std::getline(in, header_line)) throw ParseError("encoder model " + path.string() + ": missing header", 0);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("encoder model " + path.string() + ": malformed header: " + e.what(), 0);
    }
    const auto version = detail::integer_field(header, "format_version");
    if (version != kEncoderFormatVersion) {
        throw ParseError("encoder model " + path.string() + ": unsupported format_version " +
                             std::to_string(version) + " (expected " + std::to_string(kEncoderFormatVersion) + ")",
                         0);
    }
    const auto vocab = detail::integer_field(header, "vocab_dim");
    const auto dim = detail::integer_field(header, "embed_dim");
    if (vocab < 2 || dim < 2) throw ParseError("encoder model: vocab_dim and embed_dim must be >= 2", 0);

    EncoderModel m;
    m.format_version = static_cast<int>(version);
    m.vocab_dim = static_cast<std::size_t>(vocab);
    m.embed_dim = static_cast<std::size_t>(dim);
    m.embeddings.assign(m.vocab_dim * m.embed_dim, 0.0);
    in.read(reinterpret_cast<char*>(m.embeddings.data()),
            static_cast<std::streamsize>(m.embeddings.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(m.embeddings.size() * sizeof(double))) {
        throw ParseError("encoder model " + path.string() + ": truncated matrix", 0);
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw ParseError("encoder model " + path.string() + ": trailing bytes after matrix", 0);
    }
    return m;
}

}  // namespace synthweight
