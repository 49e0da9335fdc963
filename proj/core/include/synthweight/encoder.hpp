#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "synthweight/corpus.hpp"

namespace synthweight {

inline constexpr int kEncoderFormatVersion = 1;

/// How per-example loss weights are derived from importance scores.
///   dino       every example weighs 1
///   rise       weight = p_D of the machine sentence
///   filtering  weight 1, but the lowest-importance fraction is dropped
///   random     weight = a uniform draw fixed per example
enum class Variant { dino, rise, filtering, random };

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view name);

/// Hashed token-embedding table; a sentence is the mean of its token rows.
struct EncoderModel {
    std::size_t vocab_dim = 2;
    std::size_t embed_dim = 2;
    std::vector<double> embeddings = std::vector<double>(4, 0.0);  // row-major
    int format_version = kEncoderFormatVersion;

    std::span<const double> row(std::size_t r) const {
        return {embeddings.data() + r * embed_dim, embed_dim};
    }
    std::span<double> row(std::size_t r) { return {embeddings.data() + r * embed_dim, embed_dim}; }

    void validate() const;  // throws InvalidArgument

    bool operator==(const EncoderModel&) const = default;
};

/// Table with entries uniform in [-init_scale, init_scale], drawn by seed.
EncoderModel make_encoder(std::size_t vocab_dim, std::size_t embed_dim, double init_scale,
                          std::uint64_t seed);

std::size_t token_bucket(std::string_view token, std::size_t vocab_dim);

/// Mean of the token rows; zero vector for an empty token list.
std::vector<double> embed(const EncoderModel& model, const Tokens& tokens);

/// Cosine similarity clamped to [-1, 1]; 0 when either norm is below 1e-12.
/// Throws InvalidArgument on a length mismatch.
double cosine(std::span<const double> a, std::span<const double> b);

double predict_similarity(const EncoderModel& model, const Tokens& first, const Tokens& second);

/// Loss weight of one example: dino/filtering 1, rise p_d, random u.
double example_weight(Variant variant, double p_d, double u);

/// (1/B) * sum_i weights_i * (preds_i - labels_i)^2.
double batch_loss(std::span<const double> preds, std::span<const double> labels,
                  std::span<const double> weights);

/// One tokenized training pair with its loss weight.
struct TrainingPair {
    Tokens first;
    Tokens second;
    double label = 0.0;
    double weight = 1.0;
};

/// Gradient rows keyed by bucket; rows not present have zero gradient.
using RowGradients = std::map<std::size_t, std::vector<double>>;

/// batch_loss of the model's predictions on `batch`.
double pair_batch_loss(const EncoderModel& model, std::span<const TrainingPair> batch);

/// Exact gradient of pair_batch_loss through cosine and mean pooling.
/// Examples with weight 0 contribute nothing.
RowGradients pair_batch_gradient(const EncoderModel& model, std::span<const TrainingPair> batch);

struct TrainConfig {
    Variant variant = Variant::dino;
    double learning_rate = 0.05;
    int batch_size = 32;
    int epochs = 3;
    std::uint64_t seed = 0;
    double filter_fraction = 0.1;
    double init_scale = 0.1;
    std::size_t vocab_dim = std::size_t{1} << 16;
    std::size_t embed_dim = 64;

    void validate() const;  // throws InvalidArgument
};

/// Importance p_D per example id.
using ScoreMap = std::unordered_map<std::string, double>;

struct TrainingSet {
    std::vector<std::string> ids;
    std::vector<TrainingPair> pairs;
};

/// Train-split pairs with their variant weights (filtering already applied).
/// Throws InvalidArgument when rise/filtering lack a score for a train pair,
/// when a score is outside [0, 1], or when the train split is empty.
TrainingSet build_training_set(const Corpus& corpus, const ScoreMap& scores, const TrainConfig& config);

struct TrainStats {
    std::size_t examples_used = 0;
    /// Full-set loss before training and after each epoch.
    std::vector<double> epoch_losses;
};

/// Mini-batch gradient descent on the train split of `corpus`.
EncoderModel train(const Corpus& corpus, const ScoreMap& scores, const TrainConfig& config,
                   TrainStats* stats = nullptr);

/// Same loop on a prepared training set.
EncoderModel train_on(const TrainingSet& set, const TrainConfig& config, TrainStats* stats = nullptr);

/// Binary container: a "SWENC1" magic line, one JSON header line describing
/// format_version, vocab_dim, embed_dim and layout, then the matrix as
/// row-major little-endian float64. `stamp`, when given, goes in the header.
void save_encoder(const EncoderModel& model, const std::filesystem::path& path,
                  const RunStamp* stamp = nullptr);
EncoderModel load_encoder(const std::filesystem::path& path);

}  // namespace synthweight
