#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "synthweight/corpus.hpp"

namespace synthweight::toy {

/// Sentences from a small template grammar over synonym groups. Surface form
/// is natural (capitalized, final period); every slot word is drawn from a
/// concept with three interchangeable synonyms.
std::vector<std::string> make_sentences(std::size_t count, std::uint64_t seed);

struct PairOptions {
    std::size_t count = 200;
    std::uint64_t seed = 0;
    double dev_fraction = 0.1;
    double test_fraction = 0.1;
};

/// Generated corpus of (human, machine, label) pairs with labels in
/// {0, 0.5, 1}: 1 keeps every concept of the human sentence under new
/// synonyms, 0.5 keeps half of them, 0 shares none. Splits are assigned in
/// blocks: train first, then dev, then test.
Corpus make_pairs(const PairOptions& options);

struct NoiseOptions {
    double noise_rate = 0.0;
    std::uint64_t seed = 0;
    /// Replace the label of every corrupted pair with a wrong one
    /// (>= 0.5 becomes 0, below 0.5 becomes 1).
    bool noisy_labels = false;
    /// Restrict corruption to one split; all splits when empty.
    std::optional<Split> only_split;
    std::vector<CorruptionMode> modes{kAllCorruptionModes.begin(), kAllCorruptionModes.end()};
};

struct CorruptedEntry {
    std::string id;
    CorruptionMode mode;
};

struct NoiseResult {
    Corpus corpus;
    std::vector<CorruptedEntry> corrupted;
    /// Selected for corruption but too short to corrupt.
    std::vector<std::string> skipped;
};

/// Replaces round(noise_rate * M) machine sentences (M = eligible pairs) by
/// corrupt() outputs. Selection and modes are deterministic by seed.
NoiseResult inject_noise(const Corpus& corpus, const NoiseOptions& options);

}  // namespace synthweight::toy
