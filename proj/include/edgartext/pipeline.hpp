#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgartext/audit.hpp"
#include "edgartext/cleaning.hpp"
#include "edgartext/corpus_model.hpp"
#include "edgartext/dedup.hpp"
#include "edgartext/edgar_client.hpp"
#include "edgartext/extraction.hpp"

namespace edgartext {

// ---------------------------------------------------------------------------
// Configuration

struct FetchSection {
    std::string base_url;  // http(s):// endpoint or a local directory
    std::string from;      // ISO dates; both required to run the fetch stage
    std::string to;
    std::filesystem::path cache_dir = "cache";
    std::string archive_pattern = "{yyyymmdd}.nc.tar.gz";
    std::string user_agent_contact;
    double max_requests_per_second = 8.0;
    int max_concurrent = 4;
    int retry_limit = 3;
};

struct SplitsSection {
    std::filesystem::path fraud_list;  // empty → no fraud split
};

struct AuditSection {
    std::filesystem::path lexicon;  // descriptor CSV; required for descriptor ops
    std::filesystem::path ff48;     // SIC→industry CSV; optional for volume
    std::string tokenizer = "whitespace";
    std::filesystem::path tokenizer_vocab;  // required when tokenizer = subword
    std::string scorer = "stub";            // "stub" or "http"
    std::string audit_split = "final";      // final | clean | fraud | all
    std::uint64_t sample_seed = 0;
    std::filesystem::path comparison_scores;  // CSV descriptor,score for reductions
    std::filesystem::path overlap_dataset;    // dataset dir for cross-corpus overlap
};

struct OutputSection {
    std::filesystem::path work_dir = "work";
    std::filesystem::path dataset_dir;  // default: <work_dir>/dataset
    std::size_t max_shard_bytes = 1ull << 30;
};

struct PipelineConfig {
    FetchSection fetch;
    ExtractionConfig extraction;
    CleaningConfig cleaning;
    DedupConfig dedup;
    SplitsSection splits;
    AuditSection audit;
    OutputSection output;
};

/// Parse the INI-style config ("[section]" headers, "key = value" lines,
/// "#" comments).  Unknown sections or keys are errors; every field has a
/// default so an empty file is a valid config.  Relative paths are resolved
/// against base_dir.  Throws std::runtime_error with line numbers.
PipelineConfig parse_pipeline_config(std::string_view text,
                                     const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Canonical serialization: every field in a fixed order, one per line.
/// parse(serialize(c)) == c, and the digest is the sha256 of this text.
std::string serialize_pipeline_config(const PipelineConfig& config);
std::string pipeline_config_digest(const PipelineConfig& config);

/// Structural invariants (band geometry, threshold range, existence of every
/// configured input path).  Throws std::invalid_argument.
void validate_pipeline_config(const PipelineConfig& config);

// ---------------------------------------------------------------------------
// Checkpoints

struct StageCheckpoint {
    std::string stage;
    std::string config_digest;
    std::set<std::string> processed;  // completed input units
};

/// Raised when a stage's dependency has not produced its outputs yet.
struct PipelineOrderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when an existing checkpoint was produced under a different config.
struct ConfigMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::optional<StageCheckpoint> read_checkpoint(const std::filesystem::path& work_dir,
                                               const std::string& stage);
void write_checkpoint(const std::filesystem::path& work_dir, const StageCheckpoint& checkpoint);

/// Loads the stage's checkpoint for resumption: absent → fresh checkpoint;
/// digest mismatch → ConfigMismatchError telling the operator to clear the
/// work directory or restore the config.
StageCheckpoint resume_checkpoint(const std::filesystem::path& work_dir,
                                  const std::string& stage, const std::string& digest);

// ---------------------------------------------------------------------------
// Stages

using StageSummary = nlohmann::ordered_json;

StageSummary run_fetch(const PipelineConfig& config);
StageSummary run_extract(const PipelineConfig& config);
StageSummary run_clean(const PipelineConfig& config);
StageSummary run_dedup(const PipelineConfig& config);
StageSummary run_split(const PipelineConfig& config);

enum class AuditOp { kPronouns, kDescriptors, kToxicity, kVolume, kOverlap };

StageSummary run_audit(const PipelineConfig& config, AuditOp op);
/// Pronouns, descriptors, toxicity, and volume in one pass; overlap only
/// when a comparison dataset is configured.
StageSummary run_audit_all(const PipelineConfig& config);

StageSummary emit_report(const PipelineConfig& config);

/// fetch → extract → clean → dedup → split → audit (all) → report.  The
/// fetch stage is skipped when no date range is configured (reprocessing an
/// already-populated cache).
StageSummary run_all(const PipelineConfig& config);

}  // namespace edgartext
