#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "synthweight/common.hpp"

namespace synthweight {

enum class Split { train, dev, test };
enum class Origin { human, machine };

std::string_view to_string(Split split);
std::string_view to_string(Origin origin);
Split parse_split(std::string_view name);    // throws InvalidArgument
Origin parse_origin(std::string_view name);  // throws InvalidArgument

/// One (human sentence, machine sentence, similarity label) triple.
struct PairedExample {
    std::string id;
    std::string human_text;
    std::string machine_text;
    double label = 0.0;
    Split split = Split::train;

    bool operator==(const PairedExample&) const = default;
};

struct LabeledSentence {
    std::string text;
    Origin origin = Origin::human;

    bool operator==(const LabeledSentence&) const = default;
};

struct SplitCounts {
    std::size_t train = 0;
    std::size_t dev = 0;
    std::size_t test = 0;

    bool operator==(const SplitCounts&) const = default;
};

/// Ordered collection of pairs, in file order. `generated` marks corpora
/// whose labels come from the generator's similarity levels {0, 0.5, 1}.
struct Corpus {
    std::string name;
    bool generated = false;
    std::vector<PairedExample> examples;

    SplitCounts split_counts() const;
    /// Examples of one split, in order. Name and flag are kept.
    Corpus subset(Split split) const;

    bool operator==(const Corpus&) const = default;
};

/// Lowercases, splits on Unicode whitespace and strips leading/trailing
/// punctuation from each token. Internal apostrophes and hyphens survive;
/// tokens that become empty are dropped. Case folding covers ASCII, Latin-1,
/// Latin Extended-A, basic Greek and basic Cyrillic.
Tokens tokenize(std::string_view text);

/// Tokens joined with single spaces.
std::string join_tokens(const Tokens& tokens);

/// Checks the corpus invariants: non-empty trimmed texts, label range
/// (and {0, 0.5, 1} when generated), unique ids. Throws InvalidArgument.
void validate(const Corpus& corpus);

/// Reads a pair file (JSON Lines: id, human, machine, label, split).
/// Blank lines are skipped. Errors carry the offending line and field.
Corpus load_pairs(const std::filesystem::path& path, bool generated = false);
void write_pairs(const Corpus& corpus, const std::filesystem::path& path);

/// Reads/writes an SDI file (JSON Lines: text, origin).
std::vector<LabeledSentence> load_sdi_file(const std::filesystem::path& path);
void write_sdi_file(const std::vector<LabeledSentence>& data, const std::filesystem::path& path);

/// Balanced classifier training set: every machine sentence plus an equal
/// number of human sentences. The larger side is subsampled without
/// replacement; nothing is ever duplicated. Output order is shuffled by seed.
std::vector<LabeledSentence> balance_sentences(std::vector<std::string> human,
                                               std::vector<std::string> machine,
                                               std::uint64_t seed);

/// balance_sentences over the corpus' human and machine sides (one sentence
/// per pair on each side). Throws InvalidArgument on an empty corpus.
std::vector<LabeledSentence> derive_sdi_dataset(const Corpus& corpus, std::uint64_t seed);

enum class CorruptionMode { repeat_clause, truncate, shuffle_words, duplicate_ngram };

inline constexpr std::array<CorruptionMode, 4> kAllCorruptionModes = {
    CorruptionMode::repeat_clause, CorruptionMode::truncate, CorruptionMode::shuffle_words,
    CorruptionMode::duplicate_ngram};

std::string_view to_string(CorruptionMode mode);
CorruptionMode parse_corruption_mode(std::string_view name);

/// Deterministic edit of `text` that imitates a typical generator failure.
/// Operates on tokenize(text) and returns the edited tokens joined by spaces.
///
///   repeat_clause    a multi-word span is repeated right after itself and the
///                    sentence stops there (the words after the span are lost)
///   truncate         only a prefix or a suffix survives
///   shuffle_words    word order is permuted
///   duplicate_ngram  a short n-gram stutters two or three extra times
///
/// The repetition modes never raise Distinct-1..3 of the sentence: span
/// choices that would are rejected, falling back to repeating the whole
/// sentence (which provably never does). Throws InvalidArgument when the
/// text has fewer than two tokens.
std::string corrupt(std::string_view text, CorruptionMode mode, std::uint64_t seed);

}  // namespace synthweight
