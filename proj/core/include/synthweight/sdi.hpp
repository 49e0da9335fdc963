#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "synthweight/corpus.hpp"

namespace synthweight {

struct SparseEntry {
    std::uint32_t index;
    double value;

    bool operator==(const SparseEntry&) const = default;
};

/// Sorted by index, no duplicate indices.
using SparseVector = std::vector<SparseEntry>;

inline constexpr int kSdiFormatVersion = 1;
inline constexpr std::size_t kDefaultSdiFeatureDim = std::size_t{1} << 18;

/// Temperatures tuned per source corpus ("stsb", "qqp", "mrpc").
/// Throws InvalidArgument for other names.
double default_temperature(std::string_view source);

/// Hashed bag of features, l2-normalized. Each feature string is bucketed
/// with fnv1a64 % feature_dim:
///   w:<token>          word unigrams
///   b:<t1> <t2>        word bigrams, plus "<s> first" and "last </s>"
///   c:<3 code points>  character trigrams of " " + join_tokens + " "
///   n:<length>         token count (capped at 64)
///   r:<n>              one hit per repeated n-gram occurrence, n = 1..3
/// An empty token list gives the zero vector.
SparseVector featurize(const Tokens& tokens, std::size_t feature_dim);

struct SdiConfig {
    double learning_rate = 0.1;
    int epochs = 3;
    int batch_size = 32;
    std::uint64_t seed = 0;
    std::size_t feature_dim = kDefaultSdiFeatureDim;
    double l2 = 1e-6;

    void validate() const;  // throws InvalidArgument
};

/// Logistic classifier over hashed features. The logit z is the machine
/// logit; the importance score is the temperature-scaled human probability
/// p_D = sigmoid(-z / temperature).
struct SdiModel {
    std::size_t feature_dim = 2;
    std::vector<double> weights = std::vector<double>(2, 0.0);
    double bias = 0.0;
    double temperature = 1.0;
    int format_version = kSdiFormatVersion;

    double logit(const SparseVector& x) const;
    void validate() const;  // throws InvalidArgument

    bool operator==(const SdiModel&) const = default;
};

/// Zero-weight model of the given width.
SdiModel make_sdi_model(std::size_t feature_dim, double temperature = 1.0);

double sigmoid(double z);

/// One classifier training row: y = 1 for machine, 0 for human.
struct LogisticExample {
    SparseVector x;
    double y;
};

LogisticExample to_logistic_example(const LabeledSentence& s, std::size_t feature_dim);

/// mean_i [log(1 + e^z_i) - y_i z_i] + (l2 / 2) * ||w||^2.
double logistic_loss(const SdiModel& model, std::span<const LogisticExample> batch, double l2);

/// Gradient of logistic_loss; `grad_w` is resized to feature_dim.
void logistic_gradient(const SdiModel& model, std::span<const LogisticExample> batch, double l2,
                       std::vector<double>& grad_w, double& grad_b);

/// Mini-batch gradient descent from zero weights. Data are reshuffled each
/// epoch by seed; the returned model has temperature 1. If `epoch_losses`
/// is given, it receives the full-data loss before training and after each
/// epoch. Throws InvalidArgument unless both classes are present.
SdiModel train_sdi(const std::vector<LabeledSentence>& data, const SdiConfig& config,
                   std::vector<double>* epoch_losses = nullptr);

/// Importance score p_D in (0, 1) for one sentence.
double predict(const SdiModel& model, const Tokens& tokens);

/// Percent correct with the rule p_D > 0.5 => human, otherwise machine.
double accuracy_from_scores(std::span<const double> p_d, std::span<const Origin> origins);

/// accuracy_from_scores over predictions on `data`. Throws on empty data.
double evaluate_sdi(const SdiModel& model, const std::vector<LabeledSentence>& data);

/// JSON document; `stamp`, when given, is stored under "run".
void save_sdi_model(const SdiModel& model, const std::filesystem::path& path,
                    const RunStamp* stamp = nullptr);
/// Throws ParseError on a format_version other than kSdiFormatVersion.
SdiModel load_sdi_model(const std::filesystem::path& path);

}  // namespace synthweight
