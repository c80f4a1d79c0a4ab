#include "edgartext/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "edgartext/gzip.hpp"
#include "edgartext/hashing.hpp"
#include "edgartext/logging.hpp"
#include "edgartext/strings.hpp"

namespace edgartext {

namespace fs = std::filesystem;

namespace {

// --------------------------------------------------------------------------
// Small file helpers

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_jsonl_gz(const fs::path& path, const std::vector<DatasetRecord>& records) {
    std::string lines;
    for (const DatasetRecord& record : records) {
        lines += record_to_json_line(record);
        lines += '\n';
    }
    write_file_atomic(path, gzip_compress(lines));
}

std::vector<DatasetRecord> read_jsonl_gz(const fs::path& path) {
    const std::string raw = gzip_decompress(read_text_file(path));
    std::vector<DatasetRecord> records;
    for (std::string_view line : split_lines(raw)) {
        if (trim(line).empty()) continue;
        records.push_back(record_from_json_line(line));
    }
    return records;
}

std::vector<fs::path> sorted_gz_files(const fs::path& dir) {
    std::vector<fs::path> files;
    if (fs::exists(dir)) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".gz") {
                files.push_back(entry.path());
            }
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::string doc_id(const DatasetRecord& record) {
    return record.accession_number + "#" + std::to_string(record.document_sequence);
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

// --------------------------------------------------------------------------
// Config parsing

struct ConfigLineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void config_error(std::size_t line_number, const std::string& what) {
    throw std::runtime_error("config: line " + std::to_string(line_number) + ": " + what);
}

double parse_double_value(std::string_view value, std::size_t line_number) {
    try {
        std::size_t used = 0;
        const double parsed = std::stod(std::string(value), &used);
        if (used != value.size()) throw std::invalid_argument("junk");
        return parsed;
    } catch (const std::exception&) {
        config_error(line_number, "expected a number, got '" + std::string(value) + "'");
    }
}

std::int64_t parse_int_value(std::string_view value, std::size_t line_number) {
    try {
        std::size_t used = 0;
        const long long parsed = std::stoll(std::string(value), &used);
        if (used != value.size()) throw std::invalid_argument("junk");
        return parsed;
    } catch (const std::exception&) {
        config_error(line_number, "expected an integer, got '" + std::string(value) + "'");
    }
}

std::uint64_t parse_uint_value(std::string_view value, std::size_t line_number) {
    const std::int64_t parsed = parse_int_value(value, line_number);
    if (parsed < 0) config_error(line_number, "expected a non-negative integer");
    return static_cast<std::uint64_t>(parsed);
}

bool parse_bool_value(std::string_view value, std::size_t line_number) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    config_error(line_number, "expected true or false, got '" + std::string(value) + "'");
}

std::vector<std::string> parse_list_value(std::string_view value) {
    std::vector<std::string> items;
    for (const std::string& part : split(value, ',')) {
        const std::string_view trimmed = trim(part);
        if (!trimmed.empty()) items.emplace_back(trimmed);
    }
    return items;
}

fs::path resolve_path(const fs::path& base_dir, std::string_view value) {
    if (value.empty()) return {};
    fs::path p{std::string(value)};
    if (p.is_absolute() || base_dir.empty()) return p.lexically_normal();
    return (base_dir / p).lexically_normal();
}

fs::path resolve_path(const fs::path& base_dir, const fs::path& value) {
    return resolve_path(base_dir, std::string_view(value.native()));
}

std::string path_text(const fs::path& path) { return path.generic_string(); }

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view text, const fs::path& base_dir) {
    PipelineConfig config;
    config.cleaning = default_cleaning_config();

    std::string section;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_number = i + 1;
        std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') config_error(line_number, "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            static const std::set<std::string> kSections = {
                "fetch", "extraction", "cleaning", "dedup", "splits", "audit", "output"};
            if (!kSections.count(section)) {
                config_error(line_number, "unknown section '" + section + "'");
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) config_error(line_number, "expected key = value");
        const std::string key{trim(line.substr(0, eq))};
        const std::string_view value = trim(line.substr(eq + 1));
        if (section.empty()) config_error(line_number, "key outside any [section]");

        const auto unknown_key = [&]() {
            config_error(line_number, "unknown key '" + key + "' in [" + section + "]");
        };

        if (section == "fetch") {
            if (key == "base_url") config.fetch.base_url = std::string(value);
            else if (key == "from") config.fetch.from = std::string(value);
            else if (key == "to") config.fetch.to = std::string(value);
            else if (key == "cache_dir") config.fetch.cache_dir = resolve_path(base_dir, value);
            else if (key == "archive_pattern") config.fetch.archive_pattern = std::string(value);
            else if (key == "user_agent_contact")
                config.fetch.user_agent_contact = std::string(value);
            else if (key == "max_requests_per_second")
                config.fetch.max_requests_per_second = parse_double_value(value, line_number);
            else if (key == "max_concurrent")
                config.fetch.max_concurrent =
                    static_cast<int>(parse_int_value(value, line_number));
            else if (key == "retry_limit")
                config.fetch.retry_limit = static_cast<int>(parse_int_value(value, line_number));
            else unknown_key();
        } else if (section == "extraction") {
            if (key == "cpt_min") config.extraction.cpt_min = parse_double_value(value, line_number);
            else if (key == "hr_is_page_break")
                config.extraction.hr_is_page_break = parse_bool_value(value, line_number);
            else if (key == "page_break_styles")
                config.extraction.page_break_styles = parse_list_value(value);
            else if (key == "header_candidate_lines")
                config.extraction.header_candidate_lines =
                    static_cast<int>(parse_int_value(value, line_number));
            else if (key == "unwrap_min_length")
                config.extraction.unwrap_min_length = parse_uint_value(value, line_number);
            else unknown_key();
        } else if (section == "cleaning") {
            if (key == "excluded_forms") {
                config.cleaning.excluded_forms.clear();
                for (const std::string& form : parse_list_value(value)) {
                    config.cleaning.excluded_forms.insert(form);
                }
            } else if (key == "min_words") {
                config.cleaning.min_words = parse_uint_value(value, line_number);
            } else if (key == "max_whitespace_fraction") {
                config.cleaning.max_whitespace_fraction = parse_double_value(value, line_number);
            } else if (key == "whitespace_percentile") {
                config.cleaning.whitespace_percentile = parse_double_value(value, line_number);
            } else {
                unknown_key();
            }
        } else if (section == "dedup") {
            if (key == "shingle_n") config.dedup.shingle_n = parse_uint_value(value, line_number);
            else if (key == "num_permutations")
                config.dedup.num_permutations = parse_uint_value(value, line_number);
            else if (key == "bands") config.dedup.bands = parse_uint_value(value, line_number);
            else if (key == "rows") config.dedup.rows = parse_uint_value(value, line_number);
            else if (key == "threshold")
                config.dedup.threshold = parse_double_value(value, line_number);
            else if (key == "oversize_limit")
                config.dedup.oversize_limit = parse_uint_value(value, line_number);
            else if (key == "seed") config.dedup.seed = parse_uint_value(value, line_number);
            else unknown_key();
        } else if (section == "splits") {
            if (key == "fraud_list") config.splits.fraud_list = resolve_path(base_dir, value);
            else unknown_key();
        } else if (section == "audit") {
            if (key == "lexicon") config.audit.lexicon = resolve_path(base_dir, value);
            else if (key == "ff48") config.audit.ff48 = resolve_path(base_dir, value);
            else if (key == "tokenizer") config.audit.tokenizer = std::string(value);
            else if (key == "tokenizer_vocab")
                config.audit.tokenizer_vocab = resolve_path(base_dir, value);
            else if (key == "scorer") config.audit.scorer = std::string(value);
            else if (key == "audit_split") config.audit.audit_split = std::string(value);
            else if (key == "sample_seed")
                config.audit.sample_seed = parse_uint_value(value, line_number);
            else if (key == "comparison_scores")
                config.audit.comparison_scores = resolve_path(base_dir, value);
            else if (key == "overlap_dataset")
                config.audit.overlap_dataset = resolve_path(base_dir, value);
            else unknown_key();
        } else if (section == "output") {
            if (key == "work_dir") config.output.work_dir = resolve_path(base_dir, value);
            else if (key == "dataset_dir")
                config.output.dataset_dir = resolve_path(base_dir, value);
            else if (key == "max_shard_bytes")
                config.output.max_shard_bytes = parse_uint_value(value, line_number);
            else unknown_key();
        }
    }

    // Fields left at their (relative) defaults are anchored the same way as
    // explicitly configured ones.
    config.fetch.cache_dir = resolve_path(base_dir, config.fetch.cache_dir);
    config.splits.fraud_list = resolve_path(base_dir, config.splits.fraud_list);
    config.audit.lexicon = resolve_path(base_dir, config.audit.lexicon);
    config.audit.ff48 = resolve_path(base_dir, config.audit.ff48);
    config.audit.tokenizer_vocab = resolve_path(base_dir, config.audit.tokenizer_vocab);
    config.audit.comparison_scores = resolve_path(base_dir, config.audit.comparison_scores);
    config.audit.overlap_dataset = resolve_path(base_dir, config.audit.overlap_dataset);
    config.output.work_dir = resolve_path(base_dir, config.output.work_dir);
    config.output.dataset_dir = resolve_path(base_dir, config.output.dataset_dir);
    if (config.output.dataset_dir.empty()) {
        config.output.dataset_dir = config.output.work_dir / "dataset";
    }
    return config;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
    return parse_pipeline_config(read_text_file(path), fs::absolute(path).parent_path());
}

std::string serialize_pipeline_config(const PipelineConfig& c) {
    std::ostringstream out;
    const auto number = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "[fetch]\n";
    out << "archive_pattern = " << c.fetch.archive_pattern << "\n";
    out << "base_url = " << c.fetch.base_url << "\n";
    out << "cache_dir = " << path_text(c.fetch.cache_dir) << "\n";
    out << "from = " << c.fetch.from << "\n";
    out << "max_concurrent = " << c.fetch.max_concurrent << "\n";
    out << "max_requests_per_second = " << number(c.fetch.max_requests_per_second) << "\n";
    out << "retry_limit = " << c.fetch.retry_limit << "\n";
    out << "to = " << c.fetch.to << "\n";
    out << "user_agent_contact = " << c.fetch.user_agent_contact << "\n";
    out << "[extraction]\n";
    out << "cpt_min = " << number(c.extraction.cpt_min) << "\n";
    out << "header_candidate_lines = " << c.extraction.header_candidate_lines << "\n";
    out << "hr_is_page_break = " << (c.extraction.hr_is_page_break ? "true" : "false") << "\n";
    out << "page_break_styles = " << join(c.extraction.page_break_styles, ",") << "\n";
    out << "unwrap_min_length = " << c.extraction.unwrap_min_length << "\n";
    out << "[cleaning]\n";
    out << "excluded_forms = "
        << join(std::vector<std::string>(c.cleaning.excluded_forms.begin(),
                                         c.cleaning.excluded_forms.end()),
                ",")
        << "\n";
    out << "max_whitespace_fraction = " << number(c.cleaning.max_whitespace_fraction) << "\n";
    out << "min_words = " << c.cleaning.min_words << "\n";
    out << "whitespace_percentile = " << number(c.cleaning.whitespace_percentile) << "\n";
    out << "[dedup]\n";
    out << "bands = " << c.dedup.bands << "\n";
    out << "num_permutations = " << c.dedup.num_permutations << "\n";
    out << "oversize_limit = " << c.dedup.oversize_limit << "\n";
    out << "rows = " << c.dedup.rows << "\n";
    out << "seed = " << c.dedup.seed << "\n";
    out << "shingle_n = " << c.dedup.shingle_n << "\n";
    out << "threshold = " << number(c.dedup.threshold) << "\n";
    out << "[splits]\n";
    out << "fraud_list = " << path_text(c.splits.fraud_list) << "\n";
    out << "[audit]\n";
    out << "audit_split = " << c.audit.audit_split << "\n";
    out << "comparison_scores = " << path_text(c.audit.comparison_scores) << "\n";
    out << "ff48 = " << path_text(c.audit.ff48) << "\n";
    out << "lexicon = " << path_text(c.audit.lexicon) << "\n";
    out << "overlap_dataset = " << path_text(c.audit.overlap_dataset) << "\n";
    out << "sample_seed = " << c.audit.sample_seed << "\n";
    out << "scorer = " << c.audit.scorer << "\n";
    out << "tokenizer = " << c.audit.tokenizer << "\n";
    out << "tokenizer_vocab = " << path_text(c.audit.tokenizer_vocab) << "\n";
    out << "[output]\n";
    out << "dataset_dir = " << path_text(c.output.dataset_dir) << "\n";
    out << "max_shard_bytes = " << c.output.max_shard_bytes << "\n";
    out << "work_dir = " << path_text(c.output.work_dir) << "\n";
    return out.str();
}

std::string pipeline_config_digest(const PipelineConfig& config) {
    return sha256_hex(serialize_pipeline_config(config));
}

void validate_pipeline_config(const PipelineConfig& config) {
    const auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };

    if (config.dedup.bands * config.dedup.rows != config.dedup.num_permutations) {
        fail("dedup bands x rows must equal num_permutations (got " +
             std::to_string(config.dedup.bands) + " x " + std::to_string(config.dedup.rows) +
             " != " + std::to_string(config.dedup.num_permutations) + ")");
    }
    if (!(config.dedup.threshold > 0.0 && config.dedup.threshold <= 1.0)) {
        fail("dedup threshold must be in (0, 1]");
    }
    if (config.extraction.cpt_min < 0.0) fail("extraction cpt_min must be non-negative");
    if (config.cleaning.max_whitespace_fraction < 0.0 ||
        config.cleaning.max_whitespace_fraction > 1.0) {
        fail("cleaning max_whitespace_fraction must be in [0, 1]");
    }
    if (config.audit.tokenizer != "whitespace" && config.audit.tokenizer != "subword") {
        fail("audit tokenizer must be 'whitespace' or 'subword'");
    }
    if (config.audit.tokenizer == "subword" && config.audit.tokenizer_vocab.empty()) {
        fail("audit tokenizer = subword requires tokenizer_vocab");
    }
    if (config.audit.scorer != "stub" && config.audit.scorer != "http") {
        fail("audit scorer must be 'stub' or 'http'");
    }
    static const std::set<std::string> kSplits = {"final", "clean", "fraud", "all"};
    if (!kSplits.count(config.audit.audit_split)) {
        fail("audit audit_split must be one of final, clean, fraud, all");
    }
    if (!config.fetch.from.empty() || !config.fetch.to.empty()) {
        const auto from = parse_date_iso(config.fetch.from);
        const auto to = parse_date_iso(config.fetch.to);
        if (!from || !to) fail("fetch from/to must both be ISO dates (YYYY-MM-DD)");
        if (*to < *from) fail("fetch from must not be after to");
    }

    const auto require_exists = [&](const fs::path& path, const char* name) {
        if (!path.empty() && !fs::exists(path)) {
            fail(std::string(name) + " path does not exist: " + path.string());
        }
    };
    require_exists(config.splits.fraud_list, "splits fraud_list");
    require_exists(config.audit.lexicon, "audit lexicon");
    require_exists(config.audit.ff48, "audit ff48");
    require_exists(config.audit.tokenizer_vocab, "audit tokenizer_vocab");
    require_exists(config.audit.comparison_scores, "audit comparison_scores");
    require_exists(config.audit.overlap_dataset, "audit overlap_dataset");
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

fs::path checkpoint_path(const fs::path& work_dir, const std::string& stage) {
    return work_dir / "checkpoints" / (stage + ".json");
}

}  // namespace

std::optional<StageCheckpoint> read_checkpoint(const fs::path& work_dir,
                                               const std::string& stage) {
    const fs::path path = checkpoint_path(work_dir, stage);
    if (!fs::exists(path)) return std::nullopt;
    const auto parsed = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("stage") ||
        !parsed.contains("config_digest") || !parsed.contains("processed")) {
        throw std::runtime_error("corrupt checkpoint: " + path.string());
    }
    StageCheckpoint checkpoint;
    checkpoint.stage = parsed.at("stage").get<std::string>();
    checkpoint.config_digest = parsed.at("config_digest").get<std::string>();
    for (const auto& id : parsed.at("processed")) {
        checkpoint.processed.insert(id.get<std::string>());
    }
    return checkpoint;
}

void write_checkpoint(const fs::path& work_dir, const StageCheckpoint& checkpoint) {
    nlohmann::ordered_json body;
    body["stage"] = checkpoint.stage;
    body["config_digest"] = checkpoint.config_digest;
    body["processed"] = checkpoint.processed;
    write_file_atomic(checkpoint_path(work_dir, checkpoint.stage), body.dump(2) + "\n");
}

StageCheckpoint resume_checkpoint(const fs::path& work_dir, const std::string& stage,
                                  const std::string& digest) {
    const auto existing = read_checkpoint(work_dir, stage);
    if (!existing.has_value()) return {stage, digest, {}};
    if (existing->config_digest != digest) {
        throw ConfigMismatchError(
            "stage '" + stage + "' has a checkpoint written under config digest " +
            existing->config_digest.substr(0, 12) + "… but the current config digest is " +
            digest.substr(0, 12) +
            "…; clear the work directory's checkpoints (and stage outputs) or restore the "
            "original configuration before resuming");
    }
    return *existing;
}

// ---------------------------------------------------------------------------
// Fetch

namespace {

struct FetchedArchive {
    Date date;
    std::string url_path;
    std::string file;  // absolute path in the cache
    std::string sha256;
    ArchiveCompression compression = ArchiveCompression::kGzipTar;
};

fs::path fetched_manifest_path(const PipelineConfig& config) {
    return config.output.work_dir / "fetched.json";
}

std::vector<FetchedArchive> read_fetched_manifest(const fs::path& path) {
    std::vector<FetchedArchive> archives;
    if (!fs::exists(path)) return archives;
    const auto parsed = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("archives")) {
        throw std::runtime_error("corrupt fetch manifest: " + path.string());
    }
    for (const auto& entry : parsed.at("archives")) {
        FetchedArchive archive;
        const auto date = parse_date_iso(entry.at("date").get<std::string>());
        if (!date) throw std::runtime_error("corrupt fetch manifest date");
        archive.date = *date;
        archive.url_path = entry.at("url_path").get<std::string>();
        archive.file = entry.at("file").get<std::string>();
        archive.sha256 = entry.at("sha256").get<std::string>();
        archive.compression = entry.at("compression").get<std::string>() == "plain"
                                  ? ArchiveCompression::kPlain
                                  : ArchiveCompression::kGzipTar;
        archives.push_back(std::move(archive));
    }
    return archives;
}

void write_fetched_manifest(const fs::path& path, std::vector<FetchedArchive> archives) {
    std::sort(archives.begin(), archives.end(),
              [](const FetchedArchive& a, const FetchedArchive& b) {
                  return a.url_path < b.url_path;
              });
    nlohmann::ordered_json body;
    body["archives"] = nlohmann::ordered_json::array();
    for (const FetchedArchive& archive : archives) {
        nlohmann::ordered_json entry;
        entry["date"] = format_date_iso(archive.date);
        entry["url_path"] = archive.url_path;
        entry["file"] = archive.file;
        entry["sha256"] = archive.sha256;
        entry["compression"] =
            archive.compression == ArchiveCompression::kPlain ? "plain" : "tar.gz";
        body["archives"].push_back(std::move(entry));
    }
    write_file_atomic(path, body.dump(2) + "\n");
}

std::string yyyymmdd(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d%02u%02u", date.year, date.month, date.day);
    return buf;
}

}  // namespace

StageSummary run_fetch(const PipelineConfig& config) {
    validate_pipeline_config(config);
    if (config.fetch.from.empty() || config.fetch.to.empty()) {
        throw std::invalid_argument("fetch requires [fetch] from and to dates");
    }
    if (config.fetch.base_url.empty()) {
        throw std::invalid_argument("fetch requires [fetch] base_url");
    }
    const Date from = *parse_date_iso(config.fetch.from);
    const Date to = *parse_date_iso(config.fetch.to);
    const auto refs = list_daily_archives(from, to, config.fetch.archive_pattern);

    FetchPolicy policy;
    policy.max_requests_per_second = config.fetch.max_requests_per_second;
    policy.max_concurrent = config.fetch.max_concurrent;
    policy.user_agent_contact = config.fetch.user_agent_contact;
    policy.retry_limit = config.fetch.retry_limit;
    EdgarClient client(config.fetch.base_url, policy, config.fetch.cache_dir);

    const std::string digest = pipeline_config_digest(config);
    StageCheckpoint checkpoint = resume_checkpoint(config.output.work_dir, "fetch", digest);
    std::vector<FetchedArchive> manifest = read_fetched_manifest(fetched_manifest_path(config));

    std::size_t fetched = 0, from_cache = 0, missing = 0, resumed = 0;
    for (const ArchiveRef& ref : refs) {
        if (checkpoint.processed.count(ref.url_path)) {
            ++resumed;
            continue;
        }
        try {
            const EdgarClient::FetchResult result = client.fetch_archive(ref);
            FetchedArchive archive;
            archive.date = ref.date;
            archive.url_path = ref.url_path;
            archive.file = fs::absolute(result.path).string();
            archive.sha256 = result.sha256;
            archive.compression = ref.compression;
            manifest.push_back(archive);
            result.from_cache ? ++from_cache : ++fetched;
        } catch (const MissingArchiveError&) {
            Logger::instance().warn("archive_missing", {{"url_path", ref.url_path}});
            ++missing;
        }
        checkpoint.processed.insert(ref.url_path);
        write_fetched_manifest(fetched_manifest_path(config), manifest);
        write_checkpoint(config.output.work_dir, checkpoint);
    }

    StageSummary summary;
    summary["stage"] = "fetch";
    summary["archives"] = refs.size();
    summary["fetched"] = fetched;
    summary["from_cache"] = from_cache;
    summary["missing"] = missing;
    summary["resumed"] = resumed;
    return summary;
}

// ---------------------------------------------------------------------------
// Extract

StageSummary run_extract(const PipelineConfig& config) {
    validate_pipeline_config(config);
    const fs::path manifest_path = fetched_manifest_path(config);
    if (!fs::exists(manifest_path)) {
        throw PipelineOrderError("extract requires fetch outputs; run fetch first (missing " +
                                 manifest_path.string() + ")");
    }
    const auto archives = read_fetched_manifest(manifest_path);
    const std::string digest = pipeline_config_digest(config);
    StageCheckpoint checkpoint = resume_checkpoint(config.output.work_dir, "extract", digest);

    std::size_t processed = 0, resumed = 0, submissions = 0, quarantined = 0;
    std::size_t documents = 0, extracted = 0, skipped_empty = 0, corrupt_members = 0;
    for (const FetchedArchive& archive : archives) {
        if (checkpoint.processed.count(archive.url_path)) {
            ++resumed;
            continue;
        }
        const UnpackResult unpacked =
            unpack_archive(fs::path(archive.file), archive.compression);
        corrupt_members += unpacked.skipped.size();

        std::vector<DatasetRecord> records;
        for (const std::string& raw : unpacked.submissions) {
            const ParseOutcome outcome = parse_dissemination(raw);
            if (!outcome.submission.has_value()) {
                ++quarantined;
                Logger::instance().warn("submission_quarantined", {{"error", outcome.error}});
                continue;
            }
            ++submissions;
            const FilingSubmission& filing = *outcome.submission;
            for (const DocumentRecord& doc : filing.documents) {
                ++documents;
                const ExtractedDocument result = extract_document(doc, config.extraction);
                if (result.text.empty()) {
                    ++skipped_empty;
                    continue;
                }
                DatasetRecord record;
                record.accession_number = filing.accession;
                record.cik = static_cast<std::int64_t>(filing.cik);
                record.company_name = filing.company_name;
                record.form_type = filing.form_type;
                record.acceptance = filing.acceptance;
                record.document_sequence = doc.sequence;
                record.document_type = doc.doc_type;
                record.filename = doc.filename;
                record.sic = filing.sic;
                record.split = SplitLabel::kClean;
                record.extraction_stats = result.stats;
                record.text = result.text;
                records.push_back(std::move(record));
                ++extracted;
            }
        }
        write_jsonl_gz(config.output.work_dir / "extracted" / (yyyymmdd(archive.date) +
                                                               ".jsonl.gz"),
                       records);
        checkpoint.processed.insert(archive.url_path);
        write_checkpoint(config.output.work_dir, checkpoint);
        ++processed;
    }

    StageSummary summary;
    summary["stage"] = "extract";
    summary["archives"] = processed;
    summary["resumed"] = resumed;
    summary["submissions"] = submissions;
    summary["quarantined"] = quarantined;
    summary["corrupt_members"] = corrupt_members;
    summary["documents"] = documents;
    summary["extracted"] = extracted;
    summary["skipped_empty"] = skipped_empty;
    return summary;
}

// ---------------------------------------------------------------------------
// Clean

StageSummary run_clean(const PipelineConfig& config) {
    validate_pipeline_config(config);
    const fs::path extracted_dir = config.output.work_dir / "extracted";
    if (!fs::exists(extracted_dir) &&
        !read_checkpoint(config.output.work_dir, "extract").has_value()) {
        throw PipelineOrderError("clean requires extracted records; run extract first (missing " +
                                 extracted_dir.string() + ")");
    }
    const std::string digest = pipeline_config_digest(config);
    StageCheckpoint checkpoint = resume_checkpoint(config.output.work_dir, "clean", digest);

    std::size_t files = 0, resumed = 0, records_in = 0, kept = 0;
    std::map<std::string, std::size_t> dropped;
    for (const fs::path& file : sorted_gz_files(extracted_dir)) {
        const std::string name = file.filename().string();
        if (checkpoint.processed.count(name)) {
            ++resumed;
            continue;
        }
        std::vector<DatasetRecord> survivors;
        for (DatasetRecord& record : read_jsonl_gz(file)) {
            ++records_in;
            ExtractedDocument doc;
            doc.text = record.text;
            doc.stats = record.extraction_stats.value_or(ExtractionStats{});
            const FilterVerdict verdict =
                clean_filter(doc, record.form_type, config.cleaning);
            if (verdict.keep) {
                ++kept;
                survivors.push_back(std::move(record));
                continue;
            }
            switch (verdict.reason) {
                case FilterReason::kExcludedForm: ++dropped["excluded_form"]; break;
                case FilterReason::kTooShort: ++dropped["too_short"]; break;
                case FilterReason::kTooWhitespacy: ++dropped["too_whitespacy"]; break;
                case FilterReason::kKept: break;
            }
        }
        write_jsonl_gz(config.output.work_dir / "cleaned" / name, survivors);
        checkpoint.processed.insert(name);
        write_checkpoint(config.output.work_dir, checkpoint);
        ++files;
    }

    StageSummary summary;
    summary["stage"] = "clean";
    summary["files"] = files;
    summary["resumed"] = resumed;
    summary["records_in"] = records_in;
    summary["kept"] = kept;
    summary["dropped_excluded_form"] = dropped["excluded_form"];
    summary["dropped_too_short"] = dropped["too_short"];
    summary["dropped_too_whitespacy"] = dropped["too_whitespacy"];
    return summary;
}

// ---------------------------------------------------------------------------
// Dedup

namespace {

std::vector<DatasetRecord> read_cleaned_records(const PipelineConfig& config) {
    const fs::path cleaned_dir = config.output.work_dir / "cleaned";
    if (!fs::exists(cleaned_dir) &&
        !read_checkpoint(config.output.work_dir, "clean").has_value()) {
        throw PipelineOrderError("this stage requires cleaned records; run clean first (missing " +
                                 cleaned_dir.string() + ")");
    }
    std::vector<DatasetRecord> records;
    for (const fs::path& file : sorted_gz_files(cleaned_dir)) {
        for (DatasetRecord& record : read_jsonl_gz(file)) {
            records.push_back(std::move(record));
        }
    }
    return records;
}

FraudList load_configured_fraud_list(const PipelineConfig& config) {
    if (config.splits.fraud_list.empty()) return FraudList{};
    return load_fraud_list(config.splits.fraud_list);
}

}  // namespace

StageSummary run_dedup(const PipelineConfig& config) {
    validate_pipeline_config(config);
    const std::vector<DatasetRecord> records = read_cleaned_records(config);
    const std::string digest = pipeline_config_digest(config);
    StageCheckpoint checkpoint = resume_checkpoint(config.output.work_dir, "dedup", digest);
    const FraudList fraud = load_configured_fraud_list(config);

    // The fraud split is preserved verbatim, so only records destined for the
    // clean split enter the duplicate search.
    std::map<std::string, const DatasetRecord*> universe;
    std::size_t excluded_fraud = 0;
    for (const DatasetRecord& record : records) {
        if (fraud.matches(record.cik, record.acceptance)) {
            ++excluded_fraud;
            continue;
        }
        universe.emplace(doc_id(record), &record);
    }

    const fs::path cache_path = config.output.work_dir / "signatures.bin";
    std::map<std::string, MinHashSignature> signatures;
    if (fs::exists(cache_path)) {
        if (auto cached = read_signature_cache(cache_path, config.dedup)) {
            signatures = std::move(*cached);
        }
    }
    std::size_t computed = 0;
    std::map<std::string, MinHashSignature> current;
    for (const auto& [id, record] : universe) {
        const auto it = signatures.find(id);
        if (it != signatures.end()) {
            current.emplace(id, it->second);
            continue;
        }
        current.emplace(id, minhash(shingle(record->text, config.dedup.shingle_n),
                                    config.dedup.seed, config.dedup.num_permutations));
        ++computed;
    }
    write_signature_cache(cache_path, config.dedup, current);

    LshIndex index(config.dedup);
    for (const auto& [id, signature] : current) {
        index.insert(id, signature);
    }
    std::vector<DupCluster> clusters =
        resolve_clusters(index, config.dedup.threshold, config.dedup.oversize_limit);
    std::map<std::string, DocMeta> metas;
    for (const auto& [id, record] : universe) {
        metas.emplace(id, DocMeta{record->acceptance, record->accession_number});
    }
    const std::set<std::string> survivors = select_survivors(clusters, metas);

    std::set<std::string> removed;
    std::size_t oversize = 0;
    for (const DupCluster& cluster : clusters) {
        if (cluster.oversize) ++oversize;
        for (const std::string& member : cluster.members) {
            if (!survivors.count(member)) removed.insert(member);
        }
    }

    std::sort(clusters.begin(), clusters.end(), [](const DupCluster& a, const DupCluster& b) {
        return a.members < b.members;
    });
    nlohmann::ordered_json cluster_body = nlohmann::ordered_json::array();
    for (const DupCluster& cluster : clusters) {
        nlohmann::ordered_json entry;
        entry["members"] = cluster.members;
        entry["survivor"] = cluster.survivor;
        entry["oversize"] = cluster.oversize;
        cluster_body.push_back(std::move(entry));
    }
    const fs::path dedup_dir = config.output.work_dir / "dedup";
    write_file_atomic(dedup_dir / "clusters.json", cluster_body.dump(2) + "\n");
    std::string removed_text, survivors_text;
    for (const std::string& id : removed) removed_text += id + "\n";
    for (const std::string& id : survivors) survivors_text += id + "\n";
    write_file_atomic(dedup_dir / "removed.txt", removed_text);
    write_file_atomic(dedup_dir / "survivors.txt", survivors_text);

    checkpoint.processed.insert("all");
    write_checkpoint(config.output.work_dir, checkpoint);

    StageSummary summary;
    summary["stage"] = "dedup";
    summary["records"] = records.size();
    summary["indexed"] = universe.size();
    summary["excluded_fraud"] = excluded_fraud;
    summary["signatures_computed"] = computed;
    summary["signatures_cached"] = universe.size() - computed;
    summary["clusters"] = clusters.size();
    summary["oversize_clusters"] = oversize;
    summary["removed"] = removed.size();
    return summary;
}

// ---------------------------------------------------------------------------
// Split

StageSummary run_split(const PipelineConfig& config) {
    validate_pipeline_config(config);
    std::vector<DatasetRecord> records = read_cleaned_records(config);
    const fs::path removed_path = config.output.work_dir / "dedup" / "removed.txt";
    if (!fs::exists(removed_path)) {
        throw PipelineOrderError("split requires duplicate decisions; run dedup first (missing " +
                                 removed_path.string() + ")");
    }
    const std::string digest = pipeline_config_digest(config);
    StageCheckpoint checkpoint = resume_checkpoint(config.output.work_dir, "split", digest);

    std::set<std::string> removed;
    const std::string removed_text = read_text_file(removed_path);
    for (std::string_view line : split_lines(removed_text)) {
        if (!trim(line).empty()) removed.insert(std::string(trim(line)));
    }

    apply_fraud_split(records, load_configured_fraud_list(config));

    std::vector<DatasetRecord> output = records;
    std::size_t clean_count = 0, fraud_count = 0, final_count = 0;
    for (const DatasetRecord& record : records) {
        if (record.split == SplitLabel::kFraud) {
            ++fraud_count;
            continue;
        }
        ++clean_count;
        if (!removed.count(doc_id(record))) {
            DatasetRecord final_copy = record;
            final_copy.split = SplitLabel::kFinal;
            output.push_back(std::move(final_copy));
            ++final_count;
        }
    }

    WriteOptions options;
    options.max_shard_uncompressed_bytes = config.output.max_shard_bytes;
    options.config_digest = digest;
    options.token_counters.push_back(TokenCounter::whitespace());
    if (config.audit.tokenizer == "subword") {
        options.token_counters.push_back(
            make_token_counter("subword", config.audit.tokenizer_vocab));
    }
    const Manifest manifest = write_records(output, config.output.dataset_dir, options);

    checkpoint.processed.insert("all");
    write_checkpoint(config.output.work_dir, checkpoint);

    StageSummary summary;
    summary["stage"] = "split";
    summary["clean_records"] = clean_count;
    summary["fraud_records"] = fraud_count;
    summary["final_records"] = final_count;
    summary["record_count"] = manifest.record_count;
    summary["document_count"] = manifest.document_count;
    summary["shards"] = manifest.shards.size();
    summary["token_counts"] = manifest.token_counts;
    return summary;
}

// ---------------------------------------------------------------------------
// Audit

namespace {

std::vector<DatasetRecord> load_audit_records(const PipelineConfig& config) {
    const fs::path manifest = config.output.dataset_dir / "manifest.json";
    if (!fs::exists(manifest)) {
        throw PipelineOrderError("audit requires the split dataset; run split first (missing " +
                                 manifest.string() + ")");
    }
    std::vector<DatasetRecord> records = read_records(config.output.dataset_dir);
    if (config.audit.audit_split == "all") return records;
    const SplitLabel wanted = parse_split_label(config.audit.audit_split);
    std::vector<DatasetRecord> subset;
    for (DatasetRecord& record : records) {
        if (record.split == wanted) subset.push_back(std::move(record));
    }
    return subset;
}

fs::path audit_dir(const PipelineConfig& config) { return config.output.work_dir / "audit"; }

TokenCounter configured_token_counter(const PipelineConfig& config) {
    if (config.audit.tokenizer == "subword") {
        return make_token_counter("subword", config.audit.tokenizer_vocab);
    }
    return TokenCounter::whitespace();
}

void mark_audit_done(const PipelineConfig& config, const std::string& op,
                     const std::string& digest) {
    StageCheckpoint checkpoint = resume_checkpoint(config.output.work_dir, "audit", digest);
    checkpoint.processed.insert(op);
    write_checkpoint(config.output.work_dir, checkpoint);
}

StageSummary audit_pronouns(const PipelineConfig& config,
                            const std::vector<DatasetRecord>& records) {
    const PronounReport report = pronoun_prevalence(records);
    std::ostringstream csv;
    csv << "metric,value\n";
    csv << "total_filings," << report.total_filings << "\n";
    csv << "filings_with_gender," << report.filings_with_gender << "\n";
    csv << "gender_pct," << format_double(report.gender_pct) << "\n";
    csv << "she_pct," << format_double(report.she_pct) << "\n";
    csv << "he_pct," << format_double(report.he_pct) << "\n";
    csv << "unknown_pct," << format_double(report.unknown_pct) << "\n";
    csv << "filings_with_grammatical," << report.filings_with_grammatical << "\n";
    csv << "grammatical_pct," << format_double(report.grammatical_pct) << "\n";
    csv << "first_person_pct," << format_double(report.first_person_pct) << "\n";
    csv << "second_person_pct," << format_double(report.second_person_pct) << "\n";
    csv << "third_person_pct," << format_double(report.third_person_pct) << "\n";
    write_file_atomic(audit_dir(config) / "pronouns.csv", csv.str());

    StageSummary summary;
    summary["op"] = "pronouns";
    summary["filings"] = report.total_filings;
    summary["gender_pct"] = report.gender_pct;
    summary["grammatical_pct"] = report.grammatical_pct;
    return summary;
}

StageSummary audit_descriptors(const PipelineConfig& config,
                               const std::vector<DatasetRecord>& records) {
    if (config.audit.lexicon.empty()) {
        throw std::invalid_argument("audit descriptors requires [audit] lexicon");
    }
    const DescriptorLexicon lexicon = load_lexicon(config.audit.lexicon);
    const auto prevalence = descriptor_prevalence(records, lexicon);

    std::set<std::string> accessions;
    for (const DatasetRecord& record : records) accessions.insert(record.accession_number);

    std::ostringstream axes_csv;
    axes_csv << "axis,filings_with_axis,total_filings,axis_prevalence_pct\n";
    std::ostringstream csv;
    csv << "axis,descriptor,filing_count,filing_prevalence_pct,mention_count\n";
    std::size_t descriptor_rows = 0;
    for (const auto& [axis, stats] : prevalence) {
        axes_csv << axis_key(axis) << "," << stats.filings_with_axis << "," << accessions.size()
                 << "," << format_double(stats.axis_prevalence * 100.0) << "\n";
        for (const auto& [descriptor, d] : stats.descriptors) {
            csv << axis_key(axis) << "," << descriptor << "," << d.filing_count << ","
                << format_double(d.filing_prevalence * 100.0) << "," << d.mention_count << "\n";
            ++descriptor_rows;
        }
    }
    write_file_atomic(audit_dir(config) / "descriptor_axes.csv", axes_csv.str());
    write_file_atomic(audit_dir(config) / "descriptors.csv", csv.str());

    StageSummary summary;
    summary["op"] = "descriptors";
    summary["filings"] = accessions.size();
    summary["descriptors"] = descriptor_rows;
    return summary;
}

std::vector<std::pair<std::string, double>> parse_score_csv(const fs::path& path) {
    std::vector<std::pair<std::string, double>> scores;
    const std::string text = read_text_file(path);
    const auto lines = split_lines(text);
    if (lines.empty() || trim(lines[0]) != "descriptor,score") {
        throw std::runtime_error("comparison scores: line 1: expected header descriptor,score");
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string_view line = trim(lines[i]);
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 2) {
            throw std::runtime_error("comparison scores: line " + std::to_string(i + 1) +
                                     ": expected 2 fields");
        }
        try {
            scores.emplace_back(std::string(trim(fields[0])),
                                std::stod(std::string(trim(fields[1]))));
        } catch (const std::exception&) {
            throw std::runtime_error("comparison scores: line " + std::to_string(i + 1) +
                                     ": bad score");
        }
    }
    return scores;
}

StageSummary audit_toxicity(const PipelineConfig& config,
                            const std::vector<DatasetRecord>& records) {
    if (config.audit.lexicon.empty()) {
        throw std::invalid_argument("audit toxicity requires [audit] lexicon");
    }
    const DescriptorLexicon lexicon = load_lexicon(config.audit.lexicon);

    std::vector<DescriptorHit> hits;
    std::size_t sentences = 0;
    for (const DatasetRecord& record : records) {
        for (const std::string& sentence : split_sentences(record.text)) {
            ++sentences;
            if (auto hit = assign_descriptor(sentence, lexicon)) {
                hit->document_id = doc_id(record);
                hits.push_back(std::move(*hit));
            }
        }
    }

    std::unique_ptr<ToxicityScorer> scorer;
    if (config.audit.scorer == "http") {
        const auto env = scorer_config_from_env();
        if (!env.has_value()) {
            throw std::invalid_argument(
                "audit scorer = http requires EDGARTEXT_SCORER_URL in the environment");
        }
        scorer = std::make_unique<HttpToxicityScorer>(env->url, env->api_key);
    } else {
        scorer = std::make_unique<StubToxicityScorer>();
    }
    const ScoreResult scored = score_sentences(hits, *scorer);

    std::map<std::string, std::vector<double>> ours;
    std::ostringstream scores_csv;
    scores_csv << "descriptor,document_id,score\n";
    for (const ScoredHit& hit : scored.hits) {
        if (!hit.score.has_value()) continue;
        ours[hit.hit.descriptor].push_back(*hit.score);
        scores_csv << hit.hit.descriptor << "," << hit.hit.document_id << ","
                   << format_double(*hit.score) << "\n";
    }
    write_file_atomic(audit_dir(config) / "toxicity_scores.csv", scores_csv.str());

    std::ostringstream summary_csv;
    summary_csv << "descriptor,sentences,mean_score\n";
    for (const auto& [descriptor, values] : ours) {
        double total = 0.0;
        for (double v : values) total += v;
        summary_csv << descriptor << "," << values.size() << ","
                    << format_double(total / static_cast<double>(values.size())) << "\n";
    }
    write_file_atomic(audit_dir(config) / "toxicity_summary.csv", summary_csv.str());

    StageSummary summary;
    summary["op"] = "toxicity";
    summary["sentences"] = sentences;
    summary["descriptor_sentences"] = hits.size();
    summary["scored"] = scored.hits.size() - scored.unscored;
    summary["unscored"] = scored.unscored;

    if (!config.audit.comparison_scores.empty()) {
        const auto pool = parse_score_csv(config.audit.comparison_scores);
        std::vector<DescriptorHit> pool_hits;
        pool_hits.reserve(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) {
            DescriptorHit hit;
            hit.descriptor = pool[i].first;
            hit.sentence = std::to_string(i);  // index back into the score pool
            pool_hits.push_back(std::move(hit));
        }
        std::map<std::string, std::size_t> reference;
        for (const auto& [descriptor, values] : ours) reference[descriptor] = values.size();
        const SampleResult sampled =
            frequency_matched_sample(reference, pool_hits, config.audit.sample_seed);
        std::map<std::string, std::vector<double>> comparison;
        for (const DescriptorHit& hit : sampled.sampled) {
            comparison[hit.descriptor].push_back(pool[std::stoul(hit.sentence)].second);
        }
        const ReductionReport reduction = toxicity_reduction(ours, comparison);

        std::ostringstream reduction_csv;
        reduction_csv << "descriptor,mean_ours,mean_comparison,reduction_pct,p_value,n_ours,"
                         "n_comparison\n";
        for (const ReductionEntry& entry : reduction.entries) {
            reduction_csv << entry.descriptor << "," << format_double(entry.mean_a) << ","
                          << format_double(entry.mean_b) << ","
                          << format_double(entry.reduction_pct) << ","
                          << format_double(entry.p_value) << "," << entry.n_a << "," << entry.n_b
                          << "\n";
        }
        write_file_atomic(audit_dir(config) / "toxicity_reduction.csv", reduction_csv.str());
        std::ostringstream skipped_csv;
        skipped_csv << "descriptor,reason\n";
        for (const auto& [descriptor, reason] : reduction.skipped) {
            skipped_csv << descriptor << "," << reason << "\n";
        }
        write_file_atomic(audit_dir(config) / "toxicity_skipped.csv", skipped_csv.str());

        summary["reductions"] = reduction.entries.size();
        summary["reduction_skipped"] = reduction.skipped.size();
        std::size_t shortfall_total = 0;
        for (const auto& [descriptor, count] : sampled.shortfalls) shortfall_total += count;
        summary["sample_shortfall"] = shortfall_total;
    }
    return summary;
}

StageSummary audit_volume(const PipelineConfig& config,
                          const std::vector<DatasetRecord>& records) {
    const TokenCounter counter = configured_token_counter(config);
    std::optional<Ff48Table> table;
    if (!config.audit.ff48.empty()) table = Ff48Table::from_file(config.audit.ff48);
    const VolumeReport report =
        volume_stats(records, counter, table.has_value() ? &*table : nullptr);

    const auto write_map_csv = [&](const std::string& name, const std::string& key_header,
                                   const auto& mapping) {
        std::ostringstream csv;
        csv << key_header << ",tokens\n";
        for (const auto& [key, tokens] : mapping) {
            csv << key << "," << tokens << "\n";
        }
        write_file_atomic(audit_dir(config) / name, csv.str());
    };
    write_map_csv("volume_year.csv", "year", report.tokens_by_year);
    write_map_csv("volume_form.csv", "form_type", report.tokens_by_form);
    write_map_csv("volume_firm.csv", "cik", report.tokens_by_cik);
    if (table.has_value()) {
        write_map_csv("volume_industry.csv", "industry", report.tokens_by_industry);
    }
    std::ostringstream csv;
    csv << "metric,value\n";
    csv << "tokenizer," << report.tokenizer_id << "\n";
    csv << "total_tokens," << report.total_tokens << "\n";
    csv << "main_tokens," << report.main_tokens << "\n";
    csv << "attachment_tokens," << report.attachment_tokens << "\n";
    write_file_atomic(audit_dir(config) / "volume_summary.csv", csv.str());

    StageSummary summary;
    summary["op"] = "volume";
    summary["total_tokens"] = report.total_tokens;
    summary["main_tokens"] = report.main_tokens;
    summary["attachment_tokens"] = report.attachment_tokens;
    return summary;
}

StageSummary audit_overlap(const PipelineConfig& config,
                           const std::vector<DatasetRecord>& records) {
    if (config.audit.overlap_dataset.empty()) {
        throw std::invalid_argument("audit overlap requires [audit] overlap_dataset");
    }
    if (records.empty()) {
        throw std::invalid_argument("audit overlap requires a non-empty audit split");
    }
    const std::vector<DatasetRecord> comparison = read_records(config.audit.overlap_dataset);

    LshIndex index(config.dedup);
    for (const DatasetRecord& record : comparison) {
        index.insert(doc_id(record), minhash(shingle(record.text, config.dedup.shingle_n),
                                             config.dedup.seed,
                                             config.dedup.num_permutations));
    }
    std::vector<MinHashSignature> ours;
    ours.reserve(records.size());
    for (const DatasetRecord& record : records) {
        ours.push_back(minhash(shingle(record.text, config.dedup.shingle_n), config.dedup.seed,
                               config.dedup.num_permutations));
    }
    std::size_t matches = 0;
    const double fraction = cross_corpus_overlap(ours, index, &matches);

    std::ostringstream csv;
    csv << "metric,value\n";
    csv << "documents," << records.size() << "\n";
    csv << "comparison_documents," << comparison.size() << "\n";
    csv << "matches," << matches << "\n";
    csv << "overlap_fraction," << format_double(fraction) << "\n";
    write_file_atomic(audit_dir(config) / "overlap.csv", csv.str());

    StageSummary summary;
    summary["op"] = "overlap";
    summary["documents"] = records.size();
    summary["matches"] = matches;
    summary["overlap_fraction"] = fraction;
    return summary;
}

}  // namespace

StageSummary run_audit(const PipelineConfig& config, AuditOp op) {
    validate_pipeline_config(config);
    const std::vector<DatasetRecord> records = load_audit_records(config);
    const std::string digest = pipeline_config_digest(config);

    StageSummary summary;
    switch (op) {
        case AuditOp::kPronouns: summary = audit_pronouns(config, records); break;
        case AuditOp::kDescriptors: summary = audit_descriptors(config, records); break;
        case AuditOp::kToxicity: summary = audit_toxicity(config, records); break;
        case AuditOp::kVolume: summary = audit_volume(config, records); break;
        case AuditOp::kOverlap: summary = audit_overlap(config, records); break;
    }
    mark_audit_done(config, summary.at("op").get<std::string>(), digest);
    summary["stage"] = "audit";
    return summary;
}

StageSummary run_audit_all(const PipelineConfig& config) {
    validate_pipeline_config(config);
    const std::vector<DatasetRecord> records = load_audit_records(config);
    const std::string digest = pipeline_config_digest(config);

    StageSummary summary;
    summary["stage"] = "audit";
    nlohmann::ordered_json ops = nlohmann::ordered_json::array();
    ops.push_back(audit_pronouns(config, records));
    mark_audit_done(config, "pronouns", digest);
    if (!config.audit.lexicon.empty()) {
        ops.push_back(audit_descriptors(config, records));
        mark_audit_done(config, "descriptors", digest);
        ops.push_back(audit_toxicity(config, records));
        mark_audit_done(config, "toxicity", digest);
    }
    ops.push_back(audit_volume(config, records));
    mark_audit_done(config, "volume", digest);
    if (!config.audit.overlap_dataset.empty()) {
        ops.push_back(audit_overlap(config, records));
        mark_audit_done(config, "overlap", digest);
    }
    summary["ops"] = std::move(ops);
    return summary;
}

// ---------------------------------------------------------------------------
// Report

namespace {

/// Renders rows as an aligned text table with a two-space gutter.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        if (row.size() > widths.size()) widths.resize(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) {
            widths[i] = std::max(widths[i], row[i].size());
        }
    }
    std::string out;
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            line += row[i];
            if (i + 1 < row.size()) {
                line.append(widths[i] - row[i].size() + 2, ' ');
            }
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line;
        out += '\n';
    }
    return out;
}

std::map<std::string, std::string> read_metric_csv(const fs::path& path) {
    std::map<std::string, std::string> metrics;
    const std::string text = read_text_file(path);
    const auto lines = split_lines(text);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string_view line = trim(lines[i]);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string_view::npos) continue;
        metrics.emplace(std::string(line.substr(0, comma)),
                        std::string(line.substr(comma + 1)));
    }
    return metrics;
}

std::string fixed_pct(const std::string& value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", std::strtod(value.c_str(), nullptr));
    return buf;
}

}  // namespace

StageSummary emit_report(const PipelineConfig& config) {
    validate_pipeline_config(config);
    const fs::path manifest_path = config.output.dataset_dir / "manifest.json";
    if (!fs::exists(manifest_path)) {
        throw PipelineOrderError("report requires the split dataset; run split first (missing " +
                                 manifest_path.string() + ")");
    }
    const std::vector<DatasetRecord> records = read_records(config.output.dataset_dir);
    const fs::path report_dir = config.output.work_dir / "report";
    const fs::path audit_path = audit_dir(config);
    std::vector<std::string> files;

    // -- Split sizes and token counts ------------------------------------
    const TokenCounter counter = TokenCounter::whitespace();
    struct SplitAgg {
        std::set<std::string> filings;
        std::set<std::string> documents;
        std::size_t records = 0;
        std::size_t tokens = 0;
    };
    std::map<SplitLabel, SplitAgg> splits;
    for (const DatasetRecord& record : records) {
        SplitAgg& agg = splits[record.split];
        agg.filings.insert(record.accession_number);
        agg.documents.insert(doc_id(record));
        ++agg.records;
        agg.tokens += counter.count(record.text);
    }
    std::ostringstream splits_csv;
    splits_csv << "split,filings,documents,records,tokens\n";
    std::vector<std::vector<std::string>> splits_rows;
    splits_rows.push_back({"Split", "Filings", "Documents", "Records", "Tokens"});
    for (SplitLabel label : {SplitLabel::kClean, SplitLabel::kFraud, SplitLabel::kFinal}) {
        const SplitAgg& agg = splits[label];
        splits_csv << split_label_name(label) << "," << agg.filings.size() << ","
                   << agg.documents.size() << "," << agg.records << "," << agg.tokens << "\n";
        splits_rows.push_back({std::string(split_label_name(label)),
                               std::to_string(agg.filings.size()),
                               std::to_string(agg.documents.size()),
                               std::to_string(agg.records), std::to_string(agg.tokens)});
    }
    write_file_atomic(report_dir / "splits.csv", splits_csv.str());
    write_file_atomic(report_dir / "splits.txt", render_table(splits_rows));
    files.push_back("splits.csv");
    files.push_back("splits.txt");

    // -- Per-form duplicate token shares ---------------------------------
    const fs::path removed_path = config.output.work_dir / "dedup" / "removed.txt";
    const fs::path cleaned_dir = config.output.work_dir / "cleaned";
    if (fs::exists(removed_path) && fs::exists(cleaned_dir)) {
        std::set<std::string> removed;
        const std::string removed_text = read_text_file(removed_path);
        for (std::string_view line : split_lines(removed_text)) {
            if (!trim(line).empty()) removed.insert(std::string(trim(line)));
        }
        std::map<std::string, std::pair<std::size_t, std::size_t>> by_form;  // total, removed
        for (const fs::path& file : sorted_gz_files(cleaned_dir)) {
            for (const DatasetRecord& record : read_jsonl_gz(file)) {
                const std::size_t tokens = counter.count(record.text);
                auto& [total, dup] = by_form[record.form_type];
                total += tokens;
                if (removed.count(doc_id(record))) dup += tokens;
            }
        }
        std::ostringstream csv;
        csv << "form_type,total_tokens,duplicate_tokens,duplicate_share_pct\n";
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"Form", "Tokens", "Duplicate tokens", "Duplicate share %"});
        for (const auto& [form, counts] : by_form) {
            const double share =
                counts.first == 0
                    ? 0.0
                    : 100.0 * static_cast<double>(counts.second) /
                          static_cast<double>(counts.first);
            csv << form << "," << counts.first << "," << counts.second << ","
                << format_double(share) << "\n";
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f", share);
            rows.push_back({form, std::to_string(counts.first), std::to_string(counts.second),
                            buf});
        }
        write_file_atomic(report_dir / "duplicate_shares.csv", csv.str());
        write_file_atomic(report_dir / "duplicate_shares.txt", render_table(rows));
        files.push_back("duplicate_shares.csv");
        files.push_back("duplicate_shares.txt");
    }

    // -- Pronoun table ----------------------------------------------------
    if (fs::exists(audit_path / "pronouns.csv")) {
        const auto metrics = read_metric_csv(audit_path / "pronouns.csv");
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"Category", "% of filings"});
        rows.push_back({"Gender", fixed_pct(metrics.at("gender_pct"))});
        rows.push_back({"  She", fixed_pct(metrics.at("she_pct")) + " of gender"});
        rows.push_back({"  He", fixed_pct(metrics.at("he_pct")) + " of gender"});
        rows.push_back({"  Unknown", fixed_pct(metrics.at("unknown_pct")) + " of gender"});
        rows.push_back({"Grammatical person", fixed_pct(metrics.at("grammatical_pct"))});
        rows.push_back(
            {"  1st person", fixed_pct(metrics.at("first_person_pct")) + " of grammatical"});
        rows.push_back(
            {"  2nd person", fixed_pct(metrics.at("second_person_pct")) + " of grammatical"});
        rows.push_back(
            {"  3rd person", fixed_pct(metrics.at("third_person_pct")) + " of grammatical"});
        write_file_atomic(report_dir / "pronouns.txt", render_table(rows));
        files.push_back("pronouns.txt");
    }

    // -- Descriptor prevalence -------------------------------------------
    if (fs::exists(audit_path / "descriptors.csv") &&
        fs::exists(audit_path / "descriptor_axes.csv")) {
        struct DescriptorRow {
            std::string descriptor;
            double prevalence_pct = 0.0;
        };
        std::map<std::string, std::vector<DescriptorRow>> by_axis;
        const std::string descriptors_text = read_text_file(audit_path / "descriptors.csv");
        const auto lines = split_lines(descriptors_text);
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (trim(lines[i]).empty()) continue;
            const auto fields = split(trim(lines[i]), ',');
            if (fields.size() != 5) continue;
            by_axis[fields[0]].push_back(
                {fields[1], std::strtod(fields[3].c_str(), nullptr)});
        }
        std::map<std::string, std::string> axis_pct;
        const std::string axes_text = read_text_file(audit_path / "descriptor_axes.csv");
        const auto axis_lines = split_lines(axes_text);
        for (std::size_t i = 1; i < axis_lines.size(); ++i) {
            if (trim(axis_lines[i]).empty()) continue;
            const auto fields = split(trim(axis_lines[i]), ',');
            if (fields.size() == 4) axis_pct[fields[0]] = fields[3];
        }
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"Axis / Descriptor", "% of filings"});
        for (DescriptorAxis axis : kAllAxes) {
            const std::string key{axis_key(axis)};
            rows.push_back({std::string(axis_display_name(axis)),
                            axis_pct.count(key) ? fixed_pct(axis_pct.at(key)) : "0.0"});
            auto descriptors = by_axis[key];
            std::sort(descriptors.begin(), descriptors.end(),
                      [](const DescriptorRow& a, const DescriptorRow& b) {
                          if (a.prevalence_pct != b.prevalence_pct) {
                              return a.prevalence_pct > b.prevalence_pct;
                          }
                          return a.descriptor < b.descriptor;
                      });
            const std::size_t top = std::min<std::size_t>(descriptors.size(), 5);
            for (std::size_t i = 0; i < top; ++i) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.1f", descriptors[i].prevalence_pct);
                rows.push_back({"  " + descriptors[i].descriptor, buf + std::string(" of axis")});
            }
        }
        write_file_atomic(report_dir / "descriptors.txt", render_table(rows));
        files.push_back("descriptors.txt");
    }

    // -- Toxicity comparison ---------------------------------------------
    if (fs::exists(audit_path / "toxicity_reduction.csv")) {
        const std::string reduction_text =
            read_text_file(audit_path / "toxicity_reduction.csv");
        const auto lines = split_lines(reduction_text);
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"Descriptor", "Mean (ours)", "Mean (comparison)", "Reduction %",
                        "p-value", ""});
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (trim(lines[i]).empty()) continue;
            const auto fields = split(trim(lines[i]), ',');
            if (fields.size() != 7) continue;
            const double p = std::strtod(fields[4].c_str(), nullptr);
            char reduction[32], pbuf[32];
            std::snprintf(reduction, sizeof(reduction), "%.1f",
                          std::strtod(fields[3].c_str(), nullptr));
            std::snprintf(pbuf, sizeof(pbuf), "%.4g", p);
            rows.push_back({fields[0], fields[1], fields[2], reduction, pbuf,
                            p < 0.01 ? "**" : ""});
        }
        write_file_atomic(report_dir / "toxicity.txt", render_table(rows));
        files.push_back("toxicity.txt");
    }

    // -- Volume -----------------------------------------------------------
    if (fs::exists(audit_path / "volume_year.csv")) {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"Year", "Tokens"});
        const std::string volume_text = read_text_file(audit_path / "volume_year.csv");
        const auto lines = split_lines(volume_text);
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (trim(lines[i]).empty()) continue;
            const auto fields = split(trim(lines[i]), ',');
            if (fields.size() == 2) rows.push_back({fields[0], fields[1]});
        }
        write_file_atomic(report_dir / "volume_by_year.txt", render_table(rows));
        files.push_back("volume_by_year.txt");
    }

    StageSummary summary;
    summary["stage"] = "report";
    summary["files"] = files;
    summary["records"] = records.size();
    return summary;
}

// ---------------------------------------------------------------------------
// Run-all

StageSummary run_all(const PipelineConfig& config) {
    validate_pipeline_config(config);
    StageSummary summary;
    summary["stage"] = "run-all";
    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    if (!config.fetch.from.empty() && !config.fetch.to.empty()) {
        stages.push_back(run_fetch(config));
    }
    stages.push_back(run_extract(config));
    stages.push_back(run_clean(config));
    stages.push_back(run_dedup(config));
    stages.push_back(run_split(config));
    stages.push_back(run_audit_all(config));
    stages.push_back(emit_report(config));
    summary["stages"] = std::move(stages);
    return summary;
}

}  // namespace edgartext
