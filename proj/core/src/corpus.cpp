#include "synthweight/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "json_io.hpp"

#include "synthweight/ngram.hpp"

namespace synthweight {
namespace {

using ordered_json = nlohmann::ordered_json;

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

bool is_generated_level(double label) { return label == 0.0 || label == 0.5 || label == 1.0; }

std::ifstream open_for_read(const std::filesystem::path& path, std::string_view what) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + std::string(what) + ": " + path.string());
    return in;
}

const nlohmann::json& require(const nlohmann::json& obj, const char* field, std::size_t line) {
    auto it = obj.find(field);
    if (it == obj.end()) throw ParseError("field '" + std::string(field) + "': missing", line);
    return *it;
}

std::string require_string(const nlohmann::json& obj, const char* field, std::size_t line) {
    const auto& v = require(obj, field, line);
    if (!v.is_string()) throw ParseError("field '" + std::string(field) + "': expected string", line);
    return v.get<std::string>();
}

nlohmann::json parse_line(const std::string& text, std::size_t line) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), line);
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", line);
    return obj;
}

// Checks one example; `line` is 0 for in-memory validation.
void check_example(const PairedExample& ex, bool generated, std::size_t line) {
    auto fail = [&](const std::string& field, const std::string& msg) {
        if (line) throw ParseError("field '" + field + "': " + msg, line);
        throw InvalidArgument("example '" + ex.id + "': field '" + field + "': " + msg);
    };
    if (ex.id.empty()) fail("id", "empty id");
    if (blank(ex.human_text)) fail("human", "empty text");
    if (blank(ex.machine_text)) fail("machine", "empty text");
    if (!(ex.label >= 0.0 && ex.label <= 1.0)) {
        fail("label", "label out of range [0,1] (got " + std::to_string(ex.label) + ")");
    }
    if (generated && !is_generated_level(ex.label)) {
        fail("label", "label not in {0, 0.5, 1} for a generated corpus (got " +
                          std::to_string(ex.label) + ")");
    }
}

// Human-side (or machine-side) subsampling helper: keeps `keep` items chosen
// uniformly without replacement, in their original relative order.
std::vector<std::string> subsample(std::vector<std::string> items, std::size_t keep, Rng& rng) {
    std::vector<std::size_t> idx(items.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(idx);
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
    std::vector<std::string> out;
    out.reserve(keep);
    for (std::size_t i : idx) out.push_back(std::move(items[i]));
    return out;
}

}  // namespace

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::dev: return "dev";
        case Split::test: return "test";
    }
    return "train";
}

std::string_view to_string(Origin origin) {
    return origin == Origin::human ? "human" : "machine";
}

Split parse_split(std::string_view name) {
    if (name == "train") return Split::train;
    if (name == "dev") return Split::dev;
    if (name == "test") return Split::test;
    throw InvalidArgument("unknown split '" + std::string(name) + "' (expected train|dev|test)");
}

Origin parse_origin(std::string_view name) {
    if (name == "human") return Origin::human;
    if (name == "machine") return Origin::machine;
    throw InvalidArgument("unknown origin '" + std::string(name) + "' (expected human|machine)");
}

SplitCounts Corpus::split_counts() const {
    SplitCounts c;
    for (const auto& ex : examples) {
        switch (ex.split) {
            case Split::train: ++c.train; break;
            case Split::dev: ++c.dev; break;
            case Split::test: ++c.test; break;
        }
    }
    return c;
}

Corpus Corpus::subset(Split split) const {
    Corpus out{name, generated, {}};
    for (const auto& ex : examples) {
        if (ex.split == split) out.examples.push_back(ex);
    }
    return out;
}

void validate(const Corpus& corpus) {
    std::unordered_map<std::string_view, std::size_t> seen;
    for (const auto& ex : corpus.examples) {
        check_example(ex, corpus.generated, 0);
        if (!seen.emplace(ex.id, 0).second) {
            throw InvalidArgument("duplicate id '" + ex.id + "'");
        }
    }
}

Corpus load_pairs(const std::filesystem::path& path, bool generated) {
    auto in = open_for_read(path, "pairs file");
    Corpus corpus{path.stem().string(), generated, {}};
    std::unordered_map<std::string, std::size_t> first_line;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text)) continue;
        const auto obj = parse_line(text, line);

        PairedExample ex;
        ex.id = require_string(obj, "id", line);
        ex.human_text = require_string(obj, "human", line);
        ex.machine_text = require_string(obj, "machine", line);
        const auto& label = require(obj, "label", line);
        if (!label.is_number()) throw ParseError("field 'label': expected number", line);
        ex.label = label.get<double>();
        try {
            ex.split = parse_split(require_string(obj, "split", line));
        } catch (const InvalidArgument& e) {
            throw ParseError(std::string("field 'split': ") + e.what(), line);
        }
        check_example(ex, generated, line);

        auto [it, inserted] = first_line.emplace(ex.id, line);
        if (!inserted) {
            throw ParseError("field 'id': duplicate id '" + ex.id + "' (first seen on line " +
                                 std::to_string(it->second) + ")",
                             line);
        }
        corpus.examples.push_back(std::move(ex));
    }
    return corpus;
}

void write_pairs(const Corpus& corpus, const std::filesystem::path& path) {
    auto out = detail::open_output(path, "pairs file");
    for (const auto& ex : corpus.examples) {
        ordered_json obj;
        obj["id"] = ex.id;
        obj["human"] = ex.human_text;
        obj["machine"] = ex.machine_text;
        obj["label"] = ex.label;
        obj["split"] = to_string(ex.split);
        out << obj.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<LabeledSentence> load_sdi_file(const std::filesystem::path& path) {
    auto in = open_for_read(path, "SDI file");
    std::vector<LabeledSentence> data;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text)) continue;
        const auto obj = parse_line(text, line);
        LabeledSentence s;
        s.text = require_string(obj, "text", line);
        if (blank(s.text)) throw ParseError("field 'text': empty text", line);
        try {
            s.origin = parse_origin(require_string(obj, "origin", line));
        } catch (const InvalidArgument& e) {
            throw ParseError(std::string("field 'origin': ") + e.what(), line);
        }
        data.push_back(std::move(s));
    }
    return data;
}

void write_sdi_file(const std::vector<LabeledSentence>& data, const std::filesystem::path& path) {
    auto out = detail::open_output(path, "SDI file");
    for (const auto& s : data) {
        ordered_json obj;
        obj["text"] = s.text;
        obj["origin"] = to_string(s.origin);
        out << obj.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<LabeledSentence> balance_sentences(std::vector<std::string> human,
                                               std::vector<std::string> machine,
                                               std::uint64_t seed) {
    if (human.empty() || machine.empty()) {
        throw InvalidArgument("balance_sentences: both human and machine sentences are required");
    }
    Rng pick_rng(derive_seed(seed, "sdi/subsample"));
    if (human.size() > machine.size()) {
        human = subsample(std::move(human), machine.size(), pick_rng);
    } else if (machine.size() > human.size()) {
        machine = subsample(std::move(machine), human.size(), pick_rng);
    }

    std::vector<LabeledSentence> out;
    out.reserve(human.size() + machine.size());
    for (auto& m : machine) out.push_back({std::move(m), Origin::machine});
    for (auto& h : human) out.push_back({std::move(h), Origin::human});
    Rng order_rng(derive_seed(seed, "sdi/order"));
    order_rng.shuffle(out);
    return out;
}

std::vector<LabeledSentence> derive_sdi_dataset(const Corpus& corpus, std::uint64_t seed) {
    if (corpus.examples.empty()) throw InvalidArgument("derive_sdi_dataset: corpus is empty");
    std::vector<std::string> human;
    std::vector<std::string> machine;
    human.reserve(corpus.examples.size());
    machine.reserve(corpus.examples.size());
    for (const auto& ex : corpus.examples) {
        human.push_back(ex.human_text);
        machine.push_back(ex.machine_text);
    }
    return balance_sentences(std::move(human), std::move(machine), seed);
}

// ---------------------------------------------------------------------------
// Corruption

std::string_view to_string(CorruptionMode mode) {
    switch (mode) {
        case CorruptionMode::repeat_clause: return "repeat_clause";
        case CorruptionMode::truncate: return "truncate";
        case CorruptionMode::shuffle_words: return "shuffle_words";
        case CorruptionMode::duplicate_ngram: return "duplicate_ngram";
    }
    return "repeat_clause";
}

CorruptionMode parse_corruption_mode(std::string_view name) {
    for (auto mode : kAllCorruptionModes) {
        if (to_string(mode) == name) return mode;
    }
    throw InvalidArgument("unknown corruption mode '" + std::string(name) + "'");
}

namespace {

// True when no Distinct-1..3 of `after` exceeds that of `before`.
bool distinct_not_raised(const Tokens& before, const Tokens& after) {
    for (std::size_t n = 1; n <= 3; ++n) {
        if (before.size() < n) break;
        const auto b = count_ngrams(before, n);
        const auto a = count_ngrams(after, n);
        const std::size_t total_b = before.size() - n + 1;
        const std::size_t total_a = after.size() - n + 1;
        // a.size()/total_a <= b.size()/total_b, compared exactly.
        if (a.size() * total_b > b.size() * total_a) return false;
    }
    return true;
}

// words[0, end) + copies x words[begin, end) + (keep_tail ? words[end, n) : nothing)
Tokens insert_repeats(const Tokens& words, std::size_t begin, std::size_t end, std::size_t copies,
                      bool keep_tail) {
    Tokens out(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(end));
    for (std::size_t c = 0; c < copies; ++c) {
        out.insert(out.end(), words.begin() + static_cast<std::ptrdiff_t>(begin),
                   words.begin() + static_cast<std::ptrdiff_t>(end));
    }
    if (keep_tail) out.insert(out.end(), words.begin() + static_cast<std::ptrdiff_t>(end), words.end());
    return out;
}

bool multiplicity_raised(const Tokens& before, const Tokens& after, std::size_t begin,
                         std::size_t end) {
    const std::size_t n = end - begin;
    const std::string key = ngram_key(before, begin, n);
    const auto b = count_ngrams(before, n);
    const auto a = count_ngrams(after, n);
    auto get = [&](const NgramCounts& c) {
        auto it = c.find(key);
        return it == c.end() ? std::size_t{0} : it->second;
    };
    return get(a) > get(b);
}

constexpr int kSpanAttempts = 16;

Tokens repeat_span(const Tokens& words, Rng& rng, std::size_t min_len, std::size_t max_len,
                   std::size_t min_copies, std::size_t max_copies, bool keep_tail) {
    const std::size_t n = words.size();
    max_len = std::min(max_len, n);
    for (int attempt = 0; attempt < kSpanAttempts; ++attempt) {
        const std::size_t len = min_len + rng.below(max_len - min_len + 1);
        const std::size_t begin = rng.below(n - len + 1);
        const std::size_t copies = min_copies + rng.below(max_copies - min_copies + 1);
        Tokens out = insert_repeats(words, begin, begin + len, copies, keep_tail);
        if (distinct_not_raised(words, out) && multiplicity_raised(words, out, begin, begin + len)) {
            return out;
        }
    }
    // Whole-sentence repetition adds at most N-1 new N-grams while roughly
    // doubling the total, so Distinct-N cannot rise.
    return insert_repeats(words, 0, n, 1, true);
}

}  // namespace

std::string corrupt(std::string_view text, CorruptionMode mode, std::uint64_t seed) {
    const Tokens words = tokenize(text);
    const std::size_t n = words.size();
    if (n < 2) {
        throw InvalidArgument("corrupt: text needs at least 2 tokens (got " + std::to_string(n) + ")");
    }
    Rng rng(derive_seed(seed, std::string("corrupt/") + std::string(to_string(mode))));

    switch (mode) {
        case CorruptionMode::repeat_clause:
            // The generation ends inside the loop: the tail after the span is lost.
            return join_tokens(repeat_span(words, rng, 2, 6, 1, 1, false));
        case CorruptionMode::duplicate_ngram:
            return join_tokens(repeat_span(words, rng, 1, 3, 2, 3, true));
        case CorruptionMode::truncate: {
            const std::size_t keep = 1 + rng.below(n - 1);
            const bool prefix = rng.below(2) == 0;
            Tokens out = prefix ? Tokens(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(keep))
                                : Tokens(words.end() - static_cast<std::ptrdiff_t>(keep), words.end());
            return join_tokens(out);
        }
        case CorruptionMode::shuffle_words: {
            Tokens out = words;
            for (int attempt = 0; attempt < kSpanAttempts && out == words; ++attempt) rng.shuffle(out);
            if (out == words) std::rotate(out.begin(), out.begin() + 1, out.end());
            return join_tokens(out);
        }
    }
    return join_tokens(words);
}

}  // namespace synthweight
