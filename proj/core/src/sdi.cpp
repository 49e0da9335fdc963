#include "synthweight/sdi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json_io.hpp"
#include "synthweight/ngram.hpp"

namespace synthweight {

double default_temperature(std::string_view source) {
    if (source == "stsb") return 0.5;
    if (source == "qqp") return 0.9;
    if (source == "mrpc") return 0.7;
    throw InvalidArgument("no default temperature for source corpus '" + std::string(source) + "'");
}

namespace {

std::uint32_t bucket(std::string_view feature, std::size_t dim) {
    return static_cast<std::uint32_t>(fnv1a64(feature) % dim);
}

bool is_utf8_lead(char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

}  // namespace

SparseVector featurize(const Tokens& tokens, std::size_t feature_dim) {
    if (feature_dim < 2) throw InvalidArgument("featurize: feature_dim must be >= 2");
    if (tokens.empty()) return {};

    std::vector<std::uint32_t> hits;
    std::string feature;
    for (const auto& t : tokens) {
        feature = "w:";
        feature += t;
        hits.push_back(bucket(feature, feature_dim));
    }
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        feature = "b:";
        feature += tokens[i];
        feature += ' ';
        feature += tokens[i + 1];
        hits.push_back(bucket(feature, feature_dim));
    }
    hits.push_back(bucket("b:<s> " + tokens.front(), feature_dim));
    hits.push_back(bucket("b:" + tokens.back() + " </s>", feature_dim));
    hits.push_back(bucket("n:" + std::to_string(std::min<std::size_t>(tokens.size(), 64)), feature_dim));
    // One "r:n" hit per n-gram occurrence beyond the first.
    for (std::size_t n = 1; n <= 3; ++n) {
        NgramCounts counts;
        const std::size_t added = accumulate_ngrams(tokens, n, counts);
        const std::string key = "r:" + std::to_string(n);
        for (std::size_t k = counts.size(); k < added; ++k) hits.push_back(bucket(key, feature_dim));
    }
    const std::string joined = " " + join_tokens(tokens) + " ";
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < joined.size(); ++i) {
        if (is_utf8_lead(joined[i])) starts.push_back(i);
    }
    starts.push_back(joined.size());
    for (std::size_t c = 0; c + 3 < starts.size(); ++c) {
        feature = "c:";
        feature.append(joined, starts[c], starts[c + 3] - starts[c]);
        hits.push_back(bucket(feature, feature_dim));
    }

    std::sort(hits.begin(), hits.end());
    SparseVector x;
    for (std::uint32_t h : hits) {
        if (!x.empty() && x.back().index == h) {
            x.back().value += 1.0;
        } else {
            x.push_back({h, 1.0});
        }
    }
    double norm2 = 0.0;
    for (const auto& e : x) norm2 += e.value * e.value;
    const double norm = std::sqrt(norm2);
    for (auto& e : x) e.value /= norm;
    return x;
}

void SdiConfig::validate() const {
    if (!(learning_rate > 0.0)) throw InvalidArgument("SdiConfig: learning_rate must be > 0");
    if (epochs < 1) throw InvalidArgument("SdiConfig: epochs must be >= 1");
    if (batch_size < 1) throw InvalidArgument("SdiConfig: batch_size must be >= 1");
    if (feature_dim < 2) throw InvalidArgument("SdiConfig: feature_dim must be >= 2");
    if (feature_dim > (std::size_t{1} << 32)) throw InvalidArgument("SdiConfig: feature_dim too large");
    if (!(l2 >= 0.0)) throw InvalidArgument("SdiConfig: l2 must be >= 0");
}

double SdiModel::logit(const SparseVector& x) const {
    double z = bias;
    for (const auto& e : x) z += weights[e.index] * e.value;
    return z;
}

void SdiModel::validate() const {
    if (feature_dim < 2) throw InvalidArgument("SdiModel: feature_dim must be >= 2");
    if (weights.size() != feature_dim) throw InvalidArgument("SdiModel: weight vector length != feature_dim");
    if (!(temperature > 0.0)) throw InvalidArgument("SdiModel: temperature must be > 0");
}

SdiModel make_sdi_model(std::size_t feature_dim, double temperature) {
    SdiModel m;
    m.feature_dim = feature_dim;
    m.weights.assign(feature_dim, 0.0);
    m.temperature = temperature;
    m.validate();
    return m;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

LogisticExample to_logistic_example(const LabeledSentence& s, std::size_t feature_dim) {
    return {featurize(tokenize(s.text), feature_dim), s.origin == Origin::machine ? 1.0 : 0.0};
}

double logistic_loss(const SdiModel& model, std::span<const LogisticExample> batch, double l2) {
    double data = 0.0;
    for (const auto& ex : batch) {
        const double z = model.logit(ex.x);
        data += softplus(z) - ex.y * z;
    }
    double w2 = 0.0;
    for (double w : model.weights) w2 += w * w;
    return data / static_cast<double>(batch.size()) + 0.5 * l2 * w2;
}

void logistic_gradient(const SdiModel& model, std::span<const LogisticExample> batch, double l2,
                       std::vector<double>& grad_w, double& grad_b) {
    grad_w.assign(model.feature_dim, 0.0);
    grad_b = 0.0;
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (const auto& ex : batch) {
        const double r = (sigmoid(model.logit(ex.x)) - ex.y) * inv_b;
        for (const auto& e : ex.x) grad_w[e.index] += r * e.value;
        grad_b += r;
    }
    for (std::size_t j = 0; j < model.feature_dim; ++j) grad_w[j] += l2 * model.weights[j];
}

SdiModel train_sdi(const std::vector<LabeledSentence>& data, const SdiConfig& config,
                   std::vector<double>* epoch_losses) {
    config.validate();
    const bool has_human = std::any_of(data.begin(), data.end(), [](const auto& s) { return s.origin == Origin::human; });
    const bool has_machine = std::any_of(data.begin(), data.end(), [](const auto& s) { return s.origin == Origin::machine; });
    if (!has_human || !has_machine) {
        throw InvalidArgument("train_sdi: training data must contain both human and machine sentences");
    }

    std::vector<LogisticExample> rows;
    rows.reserve(data.size());
    for (const auto& s : data) rows.push_back(to_logistic_example(s, config.feature_dim));

    SdiModel model = make_sdi_model(config.feature_dim);
    if (epoch_losses) epoch_losses->assign(1, logistic_loss(model, rows, config.l2));

    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, "sdi/epoch-shuffle"));
    const auto batch_size = static_cast<std::size_t>(config.batch_size);
    const double decay = 1.0 - config.learning_rate * config.l2;
    std::vector<double> residual;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            const double step = config.learning_rate / static_cast<double>(end - start);
            // Residuals use the pre-update weights; the update below is one
            // gradient step on the batch loss.
            residual.clear();
            for (std::size_t k = start; k < end; ++k) {
                const auto& ex = rows[order[k]];
                residual.push_back(sigmoid(model.logit(ex.x)) - ex.y);
            }
            if (config.l2 > 0.0) {
                for (double& w : model.weights) w *= decay;
            }
            for (std::size_t k = start; k < end; ++k) {
                const auto& ex = rows[order[k]];
                const double r = residual[k - start];
                for (const auto& e : ex.x) model.weights[e.index] -= step * r * e.value;
                model.bias -= step * r;
            }
        }
        if (epoch_losses) epoch_losses->push_back(logistic_loss(model, rows, config.l2));
    }
    return model;
}

double predict(const SdiModel& model, const Tokens& tokens) {
    const double z = model.logit(featurize(tokens, model.feature_dim));
    return sigmoid(-z / model.temperature);
}

double accuracy_from_scores(std::span<const double> p_d, std::span<const Origin> origins) {
    if (p_d.empty()) throw InvalidArgument("accuracy: no predictions");
    if (p_d.size() != origins.size()) throw InvalidArgument("accuracy: length mismatch");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < p_d.size(); ++i) {
        const Origin predicted = p_d[i] > 0.5 ? Origin::human : Origin::machine;
        correct += predicted == origins[i];
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(p_d.size());
}

double evaluate_sdi(const SdiModel& model, const std::vector<LabeledSentence>& data) {
    if (data.empty()) throw InvalidArgument("evaluate_sdi: empty data");
    std::vector<double> scores;
    std::vector<Origin> origins;
    for (const auto& s : data) {
        scores.push_back(predict(model, tokenize(s.text)));
        origins.push_back(s.origin);
    }
    return accuracy_from_scores(scores, origins);
}

void save_sdi_model(const SdiModel& model, const std::filesystem::path& path, const RunStamp* stamp) {
    model.validate();
    detail::ordered_json j;
    j["format"] = "synthweight.sdi";
    j["format_version"] = model.format_version;
    j["feature_dim"] = model.feature_dim;
    j["temperature"] = model.temperature;
    j["bias"] = model.bias;
    if (stamp) j["run"] = {{"seed", stamp->seed}, {"config_digest", stamp->config_digest}};
    j["weights"] = model.weights;
    detail::write_text_file(path, j.dump() + "\n", "SDI model");
}

SdiModel load_sdi_model(const std::filesystem::path& path) {
    const auto j = detail::read_json_file(path, "SDI model");
    const auto version = detail::integer_field(j, "format_version");
    if (version != kSdiFormatVersion) {
        throw ParseError("SDI model " + path.string() + ": unsupported format_version " +
                             std::to_string(version) + " (expected " + std::to_string(kSdiFormatVersion) + ")",
                         0);
    }
    SdiModel m;
    m.format_version = static_cast<int>(version);
    const auto dim = detail::integer_field(j, "feature_dim");
    if (dim < 2) throw ParseError("SDI model: field 'feature_dim': must be >= 2", 0);
    m.feature_dim = static_cast<std::size_t>(dim);
    m.temperature = detail::number_field(j, "temperature");
    m.bias = detail::number_field(j, "bias");
    const auto& w = detail::field(j, "weights");
    if (!w.is_array()) throw ParseError("SDI model: field 'weights': expected array", 0);
    m.weights = w.get<std::vector<double>>();
    try {
        m.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("SDI model ") + path.string() + ": " + e.what(), 0);
    }
    return m;
}

}  // namespace synthweight
