#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synthweight/corpus.hpp"
#include "synthweight/encoder.hpp"
#include "synthweight/evaluation.hpp"
#include "synthweight/metrics.hpp"
#include "synthweight/sdi.hpp"
#include "synthweight/toy.hpp"

namespace synthweight {

std::string_view library_version();

/// A failure inside a pipeline stage (as opposed to bad input or usage).
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error(stage + ": " + message), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

// ---------------------------------------------------------------------------
// Scores file: JSON Lines with `id` and `p_d` (plus the run stamp, if any).

void write_scores(const std::vector<std::pair<std::string, double>>& scores,
                  const std::filesystem::path& path, const RunStamp* stamp = nullptr);
/// Throws ParseError on duplicates, missing fields or p_d outside [0, 1].
ScoreMap load_scores(const std::filesystem::path& path);

/// p_D of every machine sentence, in corpus order.
std::vector<std::pair<std::string, double>> score_corpus(const SdiModel& model, const Corpus& corpus);

/// Pairs each example with its score. Throws InvalidArgument on a missing id.
std::vector<ScoredPair> attach_scores(const Corpus& corpus, const ScoreMap& scores);

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineConfig {
    std::filesystem::path pairs_path;
    std::optional<std::filesystem::path> sdi_path;  // SDI file; derived from pairs when absent
    std::filesystem::path out_dir;
    bool generated = false;
    SdiConfig sdi;
    TrainConfig encoder;  // `variant` is ignored, see `variants`
    std::vector<Variant> variants{Variant::dino, Variant::rise, Variant::filtering, Variant::random};
    double fraction = 0.1;
    std::uint64_t seed = 0;
    double temperature = 0.5;

    /// Throws InvalidArgument / IoError (missing input files).
    void validate() const;

    /// Canonical JSON (sorted keys) of every field.
    std::string to_json() const;
    /// fnv1a64 of to_json(), as 16 hex digits.
    std::string digest() const;

    /// Reads a JSON config. Relative paths resolve against the file's directory.
    static PipelineConfig load(const std::filesystem::path& path);
    /// Parses config JSON text; relative paths resolve against `base_dir`.
    static PipelineConfig parse(const std::string& json_text, const std::filesystem::path& base_dir);
};

struct PipelineResult {
    std::filesystem::path manifest_path;
    double sdi_train_accuracy = 0.0;
    std::optional<double> sdi_heldout_accuracy;
    std::vector<GroupReport> groups;
    std::map<Variant, EvalReport> evaluations;
};

/// ingest -> SDI data -> train SDI -> score -> analyze -> train/evaluate each
/// variant. Writes everything into config.out_dir, including manifest.json.
/// Input problems throw before any stage runs; a stage failure writes a
/// manifest flagged partial and rethrows as StageError.
PipelineResult run_pipeline(const PipelineConfig& config);

// ---------------------------------------------------------------------------
// Single-stage commands behind the CLI subcommands.

struct GenToyOptions {
    std::optional<std::filesystem::path> pairs_in;  // generate `count` base pairs when absent
    std::size_t count = 200;
    std::filesystem::path out;
    toy::NoiseOptions noise;
};

/// Writes the pair file to `out` and a manifest of corrupted ids next to it
/// (`<out>.manifest.json`). Returns the manifest path.
std::filesystem::path gen_toy(const GenToyOptions& options);

/// `<out>.manifest.json`
std::filesystem::path manifest_path_for(const std::filesystem::path& out);

/// One-line JSON summary of a validated pair file.
std::string ingest_summary(const Corpus& corpus);

struct GroupReportFiles {
    std::filesystem::path json;
    std::filesystem::path table;
};

void write_group_report(const std::vector<GroupReport>& reports, double fraction,
                        const GroupReportFiles& files, const RunStamp* stamp = nullptr);

void write_eval_report(const EvalReport& report, Variant variant, const std::filesystem::path& path,
                       const RunStamp* stamp = nullptr);

}  // namespace synthweight
