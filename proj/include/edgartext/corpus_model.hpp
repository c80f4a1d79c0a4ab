#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "edgartext/extraction.hpp"
#include "edgartext/time.hpp"

namespace edgartext {

enum class SplitLabel {
    kClean,
    kFraud,
    kFinal,
};

std::string_view split_label_name(SplitLabel label);
SplitLabel parse_split_label(std::string_view name);  // throws on unknown

/// One persisted document (a filing attachment) with its filing metadata.
struct DatasetRecord {
    std::string accession_number;
    std::int64_t cik = 0;
    std::string company_name;
    std::string form_type;
    DateTime acceptance;       // second precision
    int document_sequence = 0; // 1 = main document, > 1 = attachment
    std::string document_type;
    std::string filename;
    std::optional<int> sic;    // industry classification input; absent on some filings
    SplitLabel split = SplitLabel::kClean;
    std::optional<ExtractionStats> extraction_stats;
    std::string text;          // non-empty

    friend bool operator==(const DatasetRecord&, const DatasetRecord&);
};

/// Serializes one record as a single JSON line (no trailing newline) with a
/// fixed key order, and parses it back.
std::string record_to_json_line(const DatasetRecord& record);
DatasetRecord record_from_json_line(std::string_view line);

struct FraudEntry {
    std::int64_t cik = 0;
    std::optional<Date> start;  // inclusive; absent = open
    std::optional<Date> end;    // inclusive; absent = open
};

struct FraudList {
    std::vector<FraudEntry> entries;

    bool matches(std::int64_t cik, const DateTime& acceptance) const;
};

/// CSV with header `cik,start_date,end_date`; empty dates leave that side of
/// the range open.  Throws std::runtime_error naming the line on malformed
/// rows, non-positive ciks, or ranges with start after end.
FraudList load_fraud_list(const std::filesystem::path& path);
FraudList parse_fraud_list(std::string_view csv);

/// Assigns fraud to records whose cik matches an entry with the acceptance
/// timestamp inside its range; everything else becomes clean.
void apply_fraud_split(std::vector<DatasetRecord>& records, const FraudList& list);

/// Token accounting.  The whitespace counter counts maximal non-whitespace
/// runs; the subword counter applies greedy longest-match against a
/// vocabulary of word-initial pieces and "##"-prefixed continuation pieces,
/// counting one token per unmatched byte as a fallback.
class TokenCounter {
  public:
    static TokenCounter whitespace();
    static TokenCounter subword(const std::vector<std::string>& vocabulary,
                                std::string id = "subword");
    /// Vocabulary file: one piece per line; blank lines and '#'-only comment
    /// lines (not "##" pieces) ignored.
    static TokenCounter subword_from_file(const std::filesystem::path& path,
                                          std::string id = "subword");

    std::size_t count(std::string_view text) const;
    const std::string& id() const { return id_; }

  private:
    TokenCounter() = default;

    std::string id_;
    bool is_subword_ = false;
    std::set<std::string, std::less<>> word_initial_;
    std::set<std::string, std::less<>> continuation_;
    std::size_t max_piece_length_ = 0;
};

/// Builds a counter by id: "whitespace", or "subword" with a vocabulary
/// path.  Throws std::invalid_argument on an unknown id or a missing
/// vocabulary for "subword".
TokenCounter make_token_counter(const std::string& id,
                                const std::optional<std::filesystem::path>& vocabulary_path = {});

struct ShardInfo {
    std::string path;  // relative to the dataset directory
    std::string sha256;
    std::size_t record_count = 0;
    std::size_t uncompressed_bytes = 0;
};

struct Manifest {
    std::size_t record_count = 0;
    std::size_t document_count = 0;  // distinct (accession, sequence) pairs
    std::map<std::string, std::size_t> form_type_counts;
    std::map<std::string, std::size_t> token_counts;  // tokenizer id → total
    std::vector<ShardInfo> shards;
    std::string config_digest;
};

struct WriteOptions {
    std::size_t max_shard_uncompressed_bytes = 1ull << 30;
    std::string config_digest = "unspecified";
    std::vector<TokenCounter> token_counters;  // empty → whitespace only
};

/// Writes records as gzip-compressed JSONL shards named
/// `split=<label>/part-<00000>.jsonl.gz` under dataset_dir, partitioned by
/// split in input order, then writes `manifest.json` last and atomically.
/// On failure every file created by this call is removed before the error
/// propagates.
Manifest write_records(const std::vector<DatasetRecord>& records,
                       const std::filesystem::path& dataset_dir,
                       const WriteOptions& options = {});

/// Reads every shard listed in the manifest, verifying each file's checksum
/// and the total record count.  Throws std::runtime_error naming the shard
/// on checksum mismatch and on count disagreement.
std::vector<DatasetRecord> read_records(const std::filesystem::path& dataset_dir);

Manifest read_manifest(const std::filesystem::path& dataset_dir);

}  // namespace edgartext
