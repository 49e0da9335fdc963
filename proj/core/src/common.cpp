#include "synthweight/common.hpp"
#include "synthweight/ngram.hpp"

#include <array>

namespace synthweight {

std::string hex64(std::uint64_t value) {
    static constexpr std::array<char, 16> digits = {'0', '1', '2', '3', '4', '5', '6', '7',
                                                    '8', '9', 'a', 'b', 'c', 'd', 'e', 'f'};
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

std::string ngram_key(const Tokens& tokens, std::size_t pos, std::size_t n) {
    std::string key;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) key.push_back('\x1f');
        key += tokens[pos + i];
    }
    return key;
}

std::size_t accumulate_ngrams(const Tokens& tokens, std::size_t n, NgramCounts& counts) {
    if (n == 0 || tokens.size() < n) return 0;
    const std::size_t total = tokens.size() - n + 1;
    for (std::size_t i = 0; i < total; ++i) ++counts[ngram_key(tokens, i, n)];
    return total;
}

NgramCounts count_ngrams(const Tokens& tokens, std::size_t n) {
    NgramCounts counts;
    accumulate_ngrams(tokens, n, counts);
    return counts;
}

}  // namespace synthweight
