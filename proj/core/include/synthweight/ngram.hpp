#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>

#include "synthweight/common.hpp"

namespace synthweight {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

/// Key for the n-gram starting at `pos`. Tokens are joined with U+001F so a
/// key can never collide with a token containing spaces.
std::string ngram_key(const Tokens& tokens, std::size_t pos, std::size_t n);

/// Occurrence counts of every n-gram of `tokens`. Empty when n > size.
NgramCounts count_ngrams(const Tokens& tokens, std::size_t n);

/// Adds the n-gram counts of `tokens` into `counts`; returns occurrences added.
std::size_t accumulate_ngrams(const Tokens& tokens, std::size_t n, NgramCounts& counts);

}  // namespace synthweight
