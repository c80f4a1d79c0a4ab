#include "edgartext/corpus_model.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "edgartext/gzip.hpp"
#include "edgartext/hashing.hpp"
#include "edgartext/strings.hpp"

namespace edgartext {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string_view split_label_name(SplitLabel label) {
    switch (label) {
        case SplitLabel::kClean: return "clean";
        case SplitLabel::kFraud: return "fraud";
        case SplitLabel::kFinal: return "final";
    }
    return "unknown";
}

SplitLabel parse_split_label(std::string_view name) {
    if (name == "clean") return SplitLabel::kClean;
    if (name == "fraud") return SplitLabel::kFraud;
    if (name == "final") return SplitLabel::kFinal;
    throw std::invalid_argument("unknown split label: " + std::string(name));
}

bool operator==(const DatasetRecord& a, const DatasetRecord& b) {
    return a.accession_number == b.accession_number && a.cik == b.cik &&
           a.company_name == b.company_name && a.form_type == b.form_type &&
           a.acceptance == b.acceptance && a.document_sequence == b.document_sequence &&
           a.document_type == b.document_type && a.filename == b.filename && a.sic == b.sic &&
           a.split == b.split && a.extraction_stats == b.extraction_stats && a.text == b.text;
}

std::string record_to_json_line(const DatasetRecord& record) {
    ordered_json j;
    j["accession_number"] = record.accession_number;
    j["cik"] = record.cik;
    j["company_name"] = record.company_name;
    j["form_type"] = record.form_type;
    j["acceptance_timestamp"] = format_datetime_iso(record.acceptance);
    j["document_sequence"] = record.document_sequence;
    j["document_type"] = record.document_type;
    j["filename"] = record.filename;
    if (record.sic.has_value()) {
        j["sic"] = *record.sic;
    } else {
        j["sic"] = nullptr;
    }
    j["split"] = std::string(split_label_name(record.split));
    if (record.extraction_stats.has_value()) {
        const ExtractionStats& s = *record.extraction_stats;
        ordered_json stats;
        stats["tables_removed"] = s.tables_removed;
        stats["tables_kept"] = s.tables_kept;
        stats["pages_unbroken"] = s.pages_unbroken;
        stats["header_lines_removed"] = s.header_lines_removed;
        stats["input_bytes"] = s.input_bytes;
        stats["output_chars"] = s.output_chars;
        stats["malformed"] = s.malformed;
        j["extraction_stats"] = std::move(stats);
    } else {
        j["extraction_stats"] = nullptr;
    }
    j["text"] = record.text;
    return j.dump();
}

DatasetRecord record_from_json_line(std::string_view line) {
    ordered_json j = ordered_json::parse(line);
    DatasetRecord record;
    record.accession_number = j.at("accession_number").get<std::string>();
    record.cik = j.at("cik").get<std::int64_t>();
    record.company_name = j.at("company_name").get<std::string>();
    record.form_type = j.at("form_type").get<std::string>();
    auto ts = parse_datetime_iso(j.at("acceptance_timestamp").get<std::string>());
    if (!ts.has_value()) {
        throw std::runtime_error("record: bad acceptance_timestamp in " + std::string(line));
    }
    record.acceptance = *ts;
    record.document_sequence = j.at("document_sequence").get<int>();
    record.document_type = j.at("document_type").get<std::string>();
    record.filename = j.at("filename").get<std::string>();
    if (!j.at("sic").is_null()) record.sic = j.at("sic").get<int>();
    record.split = parse_split_label(j.at("split").get<std::string>());
    if (!j.at("extraction_stats").is_null()) {
        const auto& stats = j.at("extraction_stats");
        ExtractionStats s;
        s.tables_removed = stats.at("tables_removed").get<std::size_t>();
        s.tables_kept = stats.at("tables_kept").get<std::size_t>();
        s.pages_unbroken = stats.at("pages_unbroken").get<std::size_t>();
        s.header_lines_removed = stats.at("header_lines_removed").get<std::size_t>();
        s.input_bytes = stats.at("input_bytes").get<std::size_t>();
        s.output_chars = stats.at("output_chars").get<std::size_t>();
        s.malformed = stats.at("malformed").get<bool>();
        record.extraction_stats = s;
    }
    record.text = j.at("text").get<std::string>();
    return record;
}

bool FraudList::matches(std::int64_t cik, const DateTime& acceptance) const {
    for (const FraudEntry& entry : entries) {
        if (entry.cik != cik) continue;
        if (entry.start.has_value() && acceptance.date < *entry.start) continue;
        if (entry.end.has_value() && *entry.end < acceptance.date) continue;
        return true;
    }
    return false;
}

FraudList parse_fraud_list(std::string_view csv) {
    FraudList list;
    const auto lines = split_lines(csv);
    if (lines.empty()) {
        throw std::runtime_error("fraud list: empty file");
    }
    if (trim(lines[0]) != "cik,start_date,end_date") {
        throw std::runtime_error("fraud list: line 1: expected header cik,start_date,end_date");
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string_view line = trim(lines[i]);
        if (line.empty()) continue;
        const auto line_error = [&](const std::string& what) {
            return std::runtime_error("fraud list: line " + std::to_string(i + 1) + ": " + what);
        };
        const auto fields = split(line, ',');
        if (fields.size() != 3) throw line_error("expected 3 fields");
        FraudEntry entry;
        try {
            std::size_t used = 0;
            entry.cik = std::stoll(std::string(trim(fields[0])), &used);
            if (used != trim(fields[0]).size()) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw line_error("bad cik");
        }
        if (entry.cik <= 0) throw line_error("cik must be positive");
        const std::string_view start_text = trim(fields[1]);
        const std::string_view end_text = trim(fields[2]);
        if (!start_text.empty()) {
            auto d = parse_date_iso(start_text);
            if (!d.has_value()) throw line_error("bad start_date");
            entry.start = *d;
        }
        if (!end_text.empty()) {
            auto d = parse_date_iso(end_text);
            if (!d.has_value()) throw line_error("bad end_date");
            entry.end = *d;
        }
        if (entry.start.has_value() && entry.end.has_value() && *entry.end < *entry.start) {
            throw line_error("start_date after end_date");
        }
        list.entries.push_back(entry);
    }
    return list;
}

FraudList load_fraud_list(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("fraud list: cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_fraud_list(buf.str());
}

void apply_fraud_split(std::vector<DatasetRecord>& records, const FraudList& list) {
    for (DatasetRecord& record : records) {
        record.split =
            list.matches(record.cik, record.acceptance) ? SplitLabel::kFraud : SplitLabel::kClean;
    }
}

TokenCounter TokenCounter::whitespace() {
    TokenCounter counter;
    counter.id_ = "whitespace";
    return counter;
}

TokenCounter TokenCounter::subword(const std::vector<std::string>& vocabulary, std::string id) {
    TokenCounter counter;
    counter.id_ = std::move(id);
    counter.is_subword_ = true;
    for (const std::string& piece : vocabulary) {
        if (piece.empty()) continue;
        if (piece.size() > 2 && piece.compare(0, 2, "##") == 0) {
            counter.continuation_.insert(piece.substr(2));
            counter.max_piece_length_ = std::max(counter.max_piece_length_, piece.size() - 2);
        } else {
            counter.word_initial_.insert(piece);
            counter.max_piece_length_ = std::max(counter.max_piece_length_, piece.size());
        }
    }
    return counter;
}

TokenCounter TokenCounter::subword_from_file(const fs::path& path, std::string id) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("tokenizer vocabulary: cannot open " + path.string());
    }
    std::vector<std::string> vocabulary;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view t = trim(line);
        if (t.empty()) continue;
        // '#'-prefixed comments, but "##..." is a continuation piece.
        if (t.front() == '#' && !(t.size() > 2 && t[1] == '#')) continue;
        vocabulary.emplace_back(t);
    }
    return subword(vocabulary, std::move(id));
}

std::size_t TokenCounter::count(std::string_view text) const {
    if (!is_subword_) {
        std::size_t words = 0;
        bool in_word = false;
        for (char c : text) {
            if (is_ws(c)) {
                in_word = false;
            } else if (!in_word) {
                in_word = true;
                ++words;
            }
        }
        return words;
    }
    std::size_t tokens = 0;
    for (std::string_view word : split_words(text)) {
        std::size_t pos = 0;
        while (pos < word.size()) {
            const auto& pieces = (pos == 0) ? word_initial_ : continuation_;
            const std::size_t longest = std::min(max_piece_length_, word.size() - pos);
            std::size_t matched = 0;
            for (std::size_t len = longest; len >= 1; --len) {
                if (pieces.count(word.substr(pos, len)) != 0) {
                    matched = len;
                    break;
                }
            }
            if (matched == 0) {
                ++tokens;  // unknown byte
                ++pos;
            } else {
                ++tokens;
                pos += matched;
            }
        }
    }
    return tokens;
}

TokenCounter make_token_counter(const std::string& id,
                                const std::optional<fs::path>& vocabulary_path) {
    if (id == "whitespace") return TokenCounter::whitespace();
    if (id == "subword") {
        if (!vocabulary_path.has_value()) {
            throw std::invalid_argument("tokenizer 'subword' requires a vocabulary path");
        }
        return TokenCounter::subword_from_file(*vocabulary_path);
    }
    throw std::invalid_argument("unknown tokenizer id: " + id);
}

namespace {

std::string shard_relative_path(SplitLabel split, std::size_t index) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "split=%s/part-%05zu.jsonl.gz",
                  std::string(split_label_name(split)).c_str(), index);
    return buf;
}

ordered_json manifest_to_json(const Manifest& manifest) {
    ordered_json j;
    j["record_count"] = manifest.record_count;
    j["document_count"] = manifest.document_count;
    ordered_json forms = ordered_json::object();
    for (const auto& [form, count] : manifest.form_type_counts) forms[form] = count;
    j["form_type_counts"] = std::move(forms);
    ordered_json tokens = ordered_json::object();
    for (const auto& [id, count] : manifest.token_counts) tokens[id] = count;
    j["token_counts"] = std::move(tokens);
    ordered_json shards = ordered_json::array();
    for (const ShardInfo& shard : manifest.shards) {
        ordered_json s;
        s["path"] = shard.path;
        s["sha256"] = shard.sha256;
        s["record_count"] = shard.record_count;
        s["uncompressed_bytes"] = shard.uncompressed_bytes;
        shards.push_back(std::move(s));
    }
    j["shards"] = std::move(shards);
    j["config_digest"] = manifest.config_digest;
    return j;
}

Manifest manifest_from_json(const ordered_json& j) {
    Manifest manifest;
    manifest.record_count = j.at("record_count").get<std::size_t>();
    manifest.document_count = j.at("document_count").get<std::size_t>();
    for (const auto& [form, count] : j.at("form_type_counts").items()) {
        manifest.form_type_counts[form] = count.get<std::size_t>();
    }
    for (const auto& [id, count] : j.at("token_counts").items()) {
        manifest.token_counts[id] = count.get<std::size_t>();
    }
    for (const auto& shard_json : j.at("shards")) {
        ShardInfo shard;
        shard.path = shard_json.at("path").get<std::string>();
        shard.sha256 = shard_json.at("sha256").get<std::string>();
        shard.record_count = shard_json.at("record_count").get<std::size_t>();
        shard.uncompressed_bytes = shard_json.at("uncompressed_bytes").get<std::size_t>();
        manifest.shards.push_back(std::move(shard));
    }
    manifest.config_digest = j.at("config_digest").get<std::string>();
    return manifest;
}

}  // namespace

Manifest write_records(const std::vector<DatasetRecord>& records, const fs::path& dataset_dir,
                       const WriteOptions& options) {
    std::vector<TokenCounter> counters = options.token_counters;
    if (counters.empty()) counters.push_back(TokenCounter::whitespace());

    Manifest manifest;
    manifest.config_digest = options.config_digest;
    std::set<std::pair<std::string, int>> distinct_documents;
    std::vector<fs::path> created;

    try {
        fs::create_directories(dataset_dir);

        // Partition by split, preserving input order within each split.
        const SplitLabel split_order[] = {SplitLabel::kClean, SplitLabel::kFraud,
                                          SplitLabel::kFinal};
        for (SplitLabel split : split_order) {
            std::string buffer;
            std::size_t buffered_records = 0;
            std::size_t shard_index = 0;

            auto flush = [&]() {
                if (buffered_records == 0) return;
                ShardInfo shard;
                shard.path = shard_relative_path(split, shard_index);
                shard.record_count = buffered_records;
                shard.uncompressed_bytes = buffer.size();
                const std::string compressed = gzip_compress(buffer);
                shard.sha256 = sha256_hex(compressed);
                const fs::path full = dataset_dir / shard.path;
                fs::create_directories(full.parent_path());
                std::ofstream out(full, std::ios::binary | std::ios::trunc);
                if (!out) {
                    throw std::runtime_error("write_records: cannot open " + full.string());
                }
                out.write(compressed.data(), static_cast<std::streamsize>(compressed.size()));
                out.close();
                if (!out) {
                    throw std::runtime_error("write_records: write failed: " + full.string());
                }
                created.push_back(full);
                manifest.shards.push_back(std::move(shard));
                buffer.clear();
                buffered_records = 0;
                ++shard_index;
            };

            for (const DatasetRecord& record : records) {
                if (record.split != split) continue;
                if (record.text.empty()) {
                    throw std::runtime_error("write_records: empty text for " +
                                             record.accession_number);
                }
                std::string line = record_to_json_line(record);
                line += '\n';
                if (!buffer.empty() &&
                    buffer.size() + line.size() > options.max_shard_uncompressed_bytes) {
                    flush();
                }
                buffer += line;
                ++buffered_records;
                ++manifest.record_count;
                ++manifest.form_type_counts[record.form_type];
                distinct_documents.emplace(record.accession_number, record.document_sequence);
                for (const TokenCounter& counter : counters) {
                    manifest.token_counts[counter.id()] += counter.count(record.text);
                }
            }
            flush();
        }
        manifest.document_count = distinct_documents.size();
        for (const TokenCounter& counter : counters) {
            manifest.token_counts.try_emplace(counter.id(), 0);
        }

        const fs::path manifest_path = dataset_dir / "manifest.json";
        const fs::path tmp_path = dataset_dir / "manifest.json.tmp";
        {
            std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
            if (!out) {
                throw std::runtime_error("write_records: cannot open " + tmp_path.string());
            }
            out << manifest_to_json(manifest).dump(2) << '\n';
            out.close();
            if (!out) {
                throw std::runtime_error("write_records: write failed: " + tmp_path.string());
            }
        }
        created.push_back(tmp_path);
        fs::rename(tmp_path, manifest_path);
        created.back() = manifest_path;
    } catch (...) {
        std::error_code ec;
        for (const fs::path& path : created) fs::remove(path, ec);
        throw;
    }
    return manifest;
}

Manifest read_manifest(const fs::path& dataset_dir) {
    const fs::path manifest_path = dataset_dir / "manifest.json";
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("read_manifest: cannot open " + manifest_path.string());
    }
    ordered_json j = ordered_json::parse(in);
    return manifest_from_json(j);
}

std::vector<DatasetRecord> read_records(const fs::path& dataset_dir) {
    const Manifest manifest = read_manifest(dataset_dir);
    std::vector<DatasetRecord> records;
    records.reserve(manifest.record_count);
    for (const ShardInfo& shard : manifest.shards) {
        const fs::path full = dataset_dir / shard.path;
        std::ifstream in(full, std::ios::binary);
        if (!in) {
            throw std::runtime_error("read_records: missing shard " + shard.path);
        }
        std::string compressed((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
        if (sha256_hex(compressed) != shard.sha256) {
            throw std::runtime_error("read_records: checksum mismatch in shard " + shard.path);
        }
        const std::string payload = gzip_decompress(compressed);
        std::size_t shard_records = 0;
        for (std::string_view line : split_lines(payload)) {
            if (trim(line).empty()) continue;
            records.push_back(record_from_json_line(line));
            ++shard_records;
        }
        if (shard_records != shard.record_count) {
            throw std::runtime_error("read_records: record count mismatch in shard " + shard.path);
        }
    }
    if (records.size() != manifest.record_count) {
        throw std::runtime_error("read_records: total record count disagrees with manifest");
    }
    return records;
}

}  // namespace edgartext
