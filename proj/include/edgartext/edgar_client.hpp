#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edgartext/rate_limiter.hpp"
#include "edgartext/time.hpp"

namespace edgartext {

/// Earliest date with a daily dissemination archive.
inline constexpr Date kEarliestArchiveDate{1996, 1, 12};

enum class ContentKind { kFixedWidthText, kHtml, kBinaryOrOther };

const char* content_kind_name(ContentKind kind);

enum class ArchiveCompression { kGzipTar, kPlain };

struct ArchiveRef {
    Date date;
    std::string url_path;  // relative to the archive base URL
    ArchiveCompression compression = ArchiveCompression::kGzipTar;
};

struct FetchPolicy {
    double max_requests_per_second = 8.0;  // below the host's fair-access ceiling
    int max_concurrent = 4;
    std::string user_agent_contact;  // mandatory; identifies the operator
    int retry_limit = 3;
    std::chrono::milliseconds backoff_base{500};

    void validate() const;  // throws std::invalid_argument on bad fields
};

struct DocumentRecord {
    int sequence = 0;
    std::string doc_type;  // "10-K", "EX-10.1", "GRAPHIC", ...
    std::string filename;
    std::string raw;
    ContentKind content_kind = ContentKind::kBinaryOrOther;
};

struct FilingSubmission {
    std::string accession;  // NNNNNNNNNN-NN-NNNNNN
    uint64_t cik = 0;
    std::string company_name;
    std::string form_type;
    DateTime acceptance;
    std::optional<int> sic;
    std::vector<DocumentRecord> documents;
};

/// Enumerate one archive reference per business day in [from, to].
/// `name_pattern` supports {yyyymmdd}, {yyyy}, {mm}, {dd} placeholders;
/// compression is inferred from the pattern suffix.
/// Throws std::invalid_argument if from > to or from precedes the earliest
/// supported archive date (the message names that date).
std::vector<ArchiveRef> list_daily_archives(const Date& from, const Date& to,
                                            const std::string& name_pattern);

struct FetchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingArchiveError : FetchError {
    MissingArchiveError(const Date& d, const std::string& what) : FetchError(what), date(d) {}
    Date date;
};

struct RateLimitError : FetchError {
    using FetchError::FetchError;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Fetches daily archives into a local cache with rate limiting, retry with
/// exponential backoff, and checksum-based idempotency.  The base URL may be
/// http(s)://, or a local directory (used by tests and offline reprocessing),
/// and the transport is injectable so failure handling is testable without
/// sockets.
class EdgarClient {
public:
    using TransportFn = std::function<HttpResponse(const std::string& url_path)>;
    using SleepFn = std::function<void(std::chrono::milliseconds)>;

    EdgarClient(std::string base_url, FetchPolicy policy, std::filesystem::path cache_dir);

    /// Replace the network layer (tests) — receives the path relative to base.
    void set_transport(TransportFn transport) { transport_ = std::move(transport); }
    /// Replace the backoff sleep (tests).
    void set_sleep(SleepFn sleep) { sleep_ = std::move(sleep); }
    /// Replace the request pacer (tests).
    void set_rate_limiter(std::shared_ptr<RateLimiter> limiter) {
        limiter_ = std::move(limiter);
    }

    struct FetchResult {
        std::filesystem::path path;
        std::string sha256;
        bool from_cache = false;
    };

    /// Cache layout: <cache>/<yyyy>/<mm>/<dd>/<archive-name> plus a sidecar
    /// <archive-name>.sha256.  A cached file whose checksum matches its
    /// sidecar is returned without touching the network.
    FetchResult fetch_archive(const ArchiveRef& ref);

private:
    HttpResponse request(const std::string& url_path);

    std::string base_url_;
    FetchPolicy policy_;
    std::filesystem::path cache_dir_;
    TransportFn transport_;
    SleepFn sleep_;
    std::shared_ptr<RateLimiter> limiter_;
};

struct UnpackResult {
    std::vector<std::string> submissions;   // raw dissemination envelopes, member order
    std::vector<std::string> skipped;       // messages for corrupt members
};

/// Unpack a daily archive file into raw submission byte sequences.
/// Corrupt members are skipped (recorded in `skipped` and logged); a corrupt
/// container (bad gzip stream, unreadable file) throws FetchError.
UnpackResult unpack_archive(const std::filesystem::path& file, ArchiveCompression compression);
UnpackResult unpack_archive_bytes(std::string_view bytes, ArchiveCompression compression);

struct ParseOutcome {
    std::optional<FilingSubmission> submission;
    std::string error;  // non-empty iff quarantined
};

/// Parse one tag-delimited dissemination envelope.  A submission missing its
/// accession number or acceptance timestamp is quarantined: the outcome
/// carries an error message instead of a submission, never a silent drop.
ParseOutcome parse_dissemination(std::string_view raw);

/// Classify a document body as HTML, fixed-width text, or binary.  Total:
/// never fails.
ContentKind classify_content(std::string_view body);

bool is_valid_accession(std::string_view accession);

}  // namespace edgartext
