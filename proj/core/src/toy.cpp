#include "synthweight/toy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace synthweight::toy {
namespace {

using Concept = std::array<const char*, 3>;

constexpr Concept kSubjects[] = {
    {"dog", "hound", "puppy"},       {"woman", "lady", "madam"},
    {"student", "pupil", "learner"}, {"farmer", "grower", "rancher"},
};

constexpr Concept kAdjectives[] = {
    {"big", "large", "huge"},        {"small", "little", "tiny"},
    {"happy", "cheerful", "joyful"}, {"old", "elderly", "aged"},
};

constexpr Concept kVerbs[] = {
    {"runs", "sprints", "dashes"}, {"sleeps", "naps", "rests"},
    {"eats", "dines", "feeds"},    {"sings", "chants", "hums"},
};

constexpr Concept kPlaces[] = {
    {"park", "garden", "meadow"}, {"kitchen", "pantry", "galley"},
    {"beach", "shore", "coast"},  {"market", "bazaar", "shop"},
};

constexpr std::size_t kSlots = 4;

template <std::size_t N>
constexpr std::size_t size_of(const Concept (&)[N]) {
    return N;
}

constexpr std::array<std::size_t, kSlots> kConceptCounts = {
    size_of(kAdjectives), size_of(kSubjects), size_of(kVerbs), size_of(kPlaces)};

// Concept indices for adjective, subject, verb, place.
using Meaning = std::array<std::size_t, kSlots>;

const char* word(std::size_t slot, std::size_t concept_index, std::size_t synonym) {
    switch (slot) {
        case 0: return kAdjectives[concept_index][synonym];
        case 1: return kSubjects[concept_index][synonym];
        case 2: return kVerbs[concept_index][synonym];
        default: return kPlaces[concept_index][synonym];
    }
}

std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

std::string realize(const Meaning& m, Rng& rng) {
    std::array<std::string, kSlots> w;
    for (std::size_t s = 0; s < kSlots; ++s) w[s] = word(s, m[s], rng.below(3));
    const std::string det = rng.below(2) == 0 ? "the" : "a";
    static const std::array<const char*, 3> preps = {"in", "near", "by"};
    const std::string prep = preps[rng.below(preps.size())];

    switch (rng.below(3)) {
        case 0:
            return capitalize(det + " " + w[0] + " " + w[1] + " " + w[2] + " " + prep + " the " +
                              w[3] + ".");
        case 1:
            return capitalize(prep) + " the " + w[3] + ", " + det + " " + w[0] + " " + w[1] + " " +
                   w[2] + ".";
        default:
            return capitalize(det + " " + w[1] + " " + w[2] + " " + prep + " the " + w[3] +
                              ", looking " + w[0] + ".");
    }
}

Meaning random_meaning(Rng& rng) {
    Meaning m;
    for (std::size_t s = 0; s < kSlots; ++s) m[s] = rng.below(kConceptCounts[s]);
    return m;
}

std::size_t other_concept(std::size_t slot, std::size_t current, Rng& rng) {
    const std::size_t r = rng.below(kConceptCounts[slot] - 1);
    return r >= current ? r + 1 : r;
}

}  // namespace

std::vector<std::string> make_sentences(std::size_t count, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "toy/sentences"));
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(realize(random_meaning(rng), rng));
    return out;
}

Corpus make_pairs(const PairOptions& options) {
    if (options.dev_fraction < 0 || options.test_fraction < 0 ||
        options.dev_fraction + options.test_fraction >= 1.0) {
        throw InvalidArgument("make_pairs: dev/test fractions must be >= 0 and sum below 1");
    }
    Rng rng(derive_seed(options.seed, "toy/pairs"));
    const auto n = options.count;
    const auto n_real = static_cast<double>(n);
    const auto n_test = static_cast<std::size_t>(std::floor(options.test_fraction * n_real + 1e-9));
    const auto n_dev = static_cast<std::size_t>(std::floor(options.dev_fraction * n_real + 1e-9));
    const std::size_t n_train = n - n_test - n_dev;

    Corpus corpus{"toy", true, {}};
    corpus.examples.reserve(n);
    static constexpr std::array<double, 3> kLevels = {0.0, 0.5, 1.0};
    for (std::size_t i = 0; i < n; ++i) {
        const Meaning human = random_meaning(rng);
        const double label = kLevels[rng.below(kLevels.size())];
        Meaning machine = human;
        if (label == 0.0) {
            for (std::size_t s = 0; s < kSlots; ++s) machine[s] = other_concept(s, human[s], rng);
        } else if (label == 0.5) {
            std::vector<std::size_t> slots(kSlots);
            std::iota(slots.begin(), slots.end(), std::size_t{0});
            rng.shuffle(slots);
            for (std::size_t k = 0; k < kSlots / 2; ++k) {
                machine[slots[k]] = other_concept(slots[k], human[slots[k]], rng);
            }
        }
        PairedExample ex;
        char id[32];
        std::snprintf(id, sizeof(id), "toy-%06zu", i);
        ex.id = id;
        ex.human_text = realize(human, rng);
        ex.machine_text = realize(machine, rng);
        ex.label = label;
        ex.split = i < n_train ? Split::train : (i < n_train + n_dev ? Split::dev : Split::test);
        corpus.examples.push_back(std::move(ex));
    }
    return corpus;
}

NoiseResult inject_noise(const Corpus& corpus, const NoiseOptions& options) {
    if (!(options.noise_rate >= 0.0 && options.noise_rate <= 1.0)) {
        throw InvalidArgument("inject_noise: noise_rate must be in [0, 1]");
    }
    if (options.modes.empty()) throw InvalidArgument("inject_noise: no corruption modes given");

    NoiseResult result{corpus, {}, {}};
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
        if (!options.only_split || corpus.examples[i].split == *options.only_split) {
            eligible.push_back(i);
        }
    }
    const auto target = static_cast<std::size_t>(
        std::llround(options.noise_rate * static_cast<double>(eligible.size())));
    Rng select_rng(derive_seed(options.seed, "noise/select"));
    select_rng.shuffle(eligible);
    eligible.resize(target);
    std::sort(eligible.begin(), eligible.end());

    Rng mode_rng(derive_seed(options.seed, "noise/mode"));
    for (std::size_t i : eligible) {
        auto& ex = result.corpus.examples[i];
        const CorruptionMode mode = mode_rng.pick(options.modes);
        if (tokenize(ex.machine_text).size() < 2) {
            result.skipped.push_back(ex.id);
            continue;
        }
        ex.machine_text = corrupt(ex.machine_text, mode, derive_seed(options.seed, ex.id));
        if (options.noisy_labels) ex.label = ex.label >= 0.5 ? 0.0 : 1.0;
        result.corrupted.push_back({ex.id, mode});
    }
    return result;
}

}  // namespace synthweight::toy
