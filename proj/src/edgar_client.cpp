#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "edgartext/edgar_client.hpp"

#include <httplib.h>

#include <cctype>
#include <fstream>
#include <thread>

#include "edgartext/gzip.hpp"
#include "edgartext/hashing.hpp"
#include "edgartext/logging.hpp"
#include "edgartext/strings.hpp"
#include "edgartext/tar.hpp"

namespace edgartext {

namespace fs = std::filesystem;

const char* content_kind_name(ContentKind kind) {
    switch (kind) {
        case ContentKind::kFixedWidthText: return "fixed-width-text";
        case ContentKind::kHtml: return "html";
        case ContentKind::kBinaryOrOther: return "binary-or-other";
    }
    return "unknown";
}

void FetchPolicy::validate() const {
    if (max_requests_per_second <= 0.0 || max_requests_per_second > 10.0)
        throw std::invalid_argument("max_requests_per_second must be in (0, 10]");
    if (max_concurrent < 1) throw std::invalid_argument("max_concurrent must be >= 1");
    if (user_agent_contact.empty())
        throw std::invalid_argument("user_agent_contact is required (identify yourself)");
    if (retry_limit < 0) throw std::invalid_argument("retry_limit must be >= 0");
}

namespace {

std::string expand_pattern(const std::string& pattern, const Date& d) {
    std::string out = pattern;
    auto replace_all = [&out](std::string_view key, const std::string& value) {
        size_t pos = 0;
        while ((pos = out.find(key, pos)) != std::string::npos) {
            out.replace(pos, key.size(), value);
            pos += value.size();
        }
    };
    char buf[8];
    replace_all("{yyyymmdd}", format_date_compact(d));
    std::snprintf(buf, sizeof(buf), "%04d", d.year);
    replace_all("{yyyy}", buf);
    std::snprintf(buf, sizeof(buf), "%02u", d.month);
    replace_all("{mm}", buf);
    std::snprintf(buf, sizeof(buf), "%02u", d.day);
    replace_all("{dd}", buf);
    return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::vector<ArchiveRef> list_daily_archives(const Date& from, const Date& to,
                                            const std::string& name_pattern) {
    if (!is_valid_date(from) || !is_valid_date(to))
        throw std::invalid_argument("invalid date in archive range");
    if (to < from) throw std::invalid_argument("archive range is reversed (from > to)");
    if (from < kEarliestArchiveDate)
        throw std::invalid_argument("daily archives begin on " +
                                    format_date_iso(kEarliestArchiveDate) +
                                    "; requested range starts " + format_date_iso(from));
    ArchiveCompression compression = ends_with(name_pattern, ".gz")
                                         ? ArchiveCompression::kGzipTar
                                         : ArchiveCompression::kPlain;
    std::vector<ArchiveRef> refs;
    for (const Date& d : business_days(from, to)) {
        refs.push_back(ArchiveRef{d, expand_pattern(name_pattern, d), compression});
    }
    return refs;
}

// ---------------------------------------------------------------------------
// EdgarClient
// ---------------------------------------------------------------------------

EdgarClient::EdgarClient(std::string base_url, FetchPolicy policy, fs::path cache_dir)
    : base_url_(std::move(base_url)),
      policy_(std::move(policy)),
      cache_dir_(std::move(cache_dir)) {
    policy_.validate();
    limiter_ = std::make_shared<RateLimiter>(policy_.max_requests_per_second);
    sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

    bool is_http = base_url_.rfind("http://", 0) == 0 || base_url_.rfind("https://", 0) == 0;
    if (is_http) {
        // Split "<scheme>://<host>[:port]" from the path prefix.
        size_t scheme_end = base_url_.find("://") + 3;
        size_t slash = base_url_.find('/', scheme_end);
        std::string origin = slash == std::string::npos ? base_url_ : base_url_.substr(0, slash);
        std::string prefix = slash == std::string::npos ? "" : base_url_.substr(slash);
        std::string agent = "edgartext/1.0 (" + policy_.user_agent_contact + ")";
        transport_ = [origin, prefix, agent](const std::string& url_path) {
            httplib::Client client(origin);
            client.set_follow_location(true);
            client.set_connection_timeout(30);
            client.set_read_timeout(120);
            httplib::Headers headers{{"User-Agent", agent}};
            auto res = client.Get(prefix + "/" + url_path, headers);
            if (!res) throw FetchError("connection failure: " + httplib::to_string(res.error()));
            return HttpResponse{res->status, res->body};
        };
    } else {
        // Local directory base: offline mirrors and test fixtures.
        fs::path base = base_url_;
        transport_ = [base](const std::string& url_path) {
            fs::path p = base / url_path;
            std::ifstream in(p, std::ios::binary);
            if (!in) return HttpResponse{404, ""};
            std::string body((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            return HttpResponse{200, std::move(body)};
        };
    }
}

HttpResponse EdgarClient::request(const std::string& url_path) {
    limiter_->acquire();
    return transport_(url_path);
}

EdgarClient::FetchResult EdgarClient::fetch_archive(const ArchiveRef& ref) {
    std::string name = ref.url_path;
    if (size_t slash = name.rfind('/'); slash != std::string::npos) name = name.substr(slash + 1);

    char day_dir[32];
    std::snprintf(day_dir, sizeof(day_dir), "%04d/%02u/%02u", ref.date.year, ref.date.month,
                  ref.date.day);
    fs::path dir = cache_dir_ / day_dir;
    fs::path target = dir / name;
    fs::path sidecar = dir / (name + ".sha256");

    // Idempotency: an intact cached copy short-circuits the network.
    if (fs::exists(target) && fs::exists(sidecar)) {
        std::ifstream side(sidecar);
        std::string recorded;
        side >> recorded;
        std::string actual = sha256_file_hex(target.string());
        if (!recorded.empty() && recorded == actual) {
            Logger::instance().debug("fetch.cache_hit", {{"archive", name}});
            return FetchResult{target, actual, true};
        }
        Logger::instance().warn("fetch.cache_corrupt", {{"archive", name}});
    }

    int attempts = policy_.retry_limit + 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            auto delay = policy_.backoff_base * (1 << (attempt - 1));
            Logger::instance().info("fetch.backoff",
                                    {{"archive", name}, {"delay_ms", delay.count()}});
            sleep_(std::chrono::duration_cast<std::chrono::milliseconds>(delay));
        }
        HttpResponse resp;
        try {
            resp = request(ref.url_path);
        } catch (const FetchError& e) {
            if (attempt + 1 == attempts) throw;
            Logger::instance().warn("fetch.retry", {{"archive", name}, {"cause", e.what()}});
            continue;
        }
        if (resp.status == 200) {
            fs::create_directories(dir);
            fs::path tmp = dir / (name + ".tmp");
            {
                std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                out.write(resp.body.data(), static_cast<std::streamsize>(resp.body.size()));
                if (!out) {
                    std::error_code ec;
                    fs::remove(tmp, ec);
                    throw FetchError("write failure for " + target.string());
                }
            }
            fs::rename(tmp, target);
            std::string digest = sha256_hex(resp.body);
            {
                std::ofstream side(sidecar, std::ios::trunc);
                side << digest << "\n";
            }
            Logger::instance().info("fetch.stored",
                                    {{"archive", name}, {"bytes", resp.body.size()}});
            return FetchResult{target, digest, false};
        }
        if (resp.status == 404) {
            throw MissingArchiveError(ref.date, "no archive published for " +
                                                    format_date_iso(ref.date) + " (" +
                                                    ref.url_path + ")");
        }
        if (resp.status == 403 || resp.status == 429) {
            if (attempt + 1 == attempts)
                throw RateLimitError("rate-limited fetching " + ref.url_path + " (HTTP " +
                                     std::to_string(resp.status) + " after " +
                                     std::to_string(policy_.retry_limit) + " retries)");
            continue;
        }
        if (attempt + 1 == attempts)
            throw FetchError("HTTP " + std::to_string(resp.status) + " fetching " + ref.url_path);
    }
    throw FetchError("unreachable retry exit for " + ref.url_path);
}

// ---------------------------------------------------------------------------
// Unpack
// ---------------------------------------------------------------------------

UnpackResult unpack_archive_bytes(std::string_view bytes, ArchiveCompression compression) {
    std::string tar_bytes;
    if (compression == ArchiveCompression::kGzipTar) {
        try {
            tar_bytes = gzip_decompress(bytes);
        } catch (const std::exception& e) {
            throw FetchError(std::string("corrupt archive container: ") + e.what());
        }
    } else {
        tar_bytes.assign(bytes.data(), bytes.size());
    }
    TarReadResult tar = read_tar(tar_bytes);
    UnpackResult out;
    for (auto& entry : tar.entries) out.submissions.push_back(std::move(entry.data));
    for (const auto& err : tar.errors) {
        Logger::instance().warn("unpack.member_skipped", {{"cause", err}});
        out.skipped.push_back(err);
    }
    return out;
}

UnpackResult unpack_archive(const fs::path& file, ArchiveCompression compression) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw FetchError("cannot open archive " + file.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return unpack_archive_bytes(bytes, compression);
}

// ---------------------------------------------------------------------------
// Dissemination parsing
// ---------------------------------------------------------------------------

namespace {

/// A "<TAG>value" line; returns false if the line is not tag-shaped.
bool parse_tag_line(std::string_view line, std::string_view& tag, std::string_view& value) {
    std::string_view t = trim(line);
    if (t.size() < 3 || t.front() != '<') return false;
    size_t close = t.find('>');
    if (close == std::string_view::npos) return false;
    tag = t.substr(1, close - 1);
    value = trim(t.substr(close + 1));
    return !tag.empty() && tag.front() != '/';
}

}  // namespace

bool is_valid_accession(std::string_view accession) {
    if (accession.size() != 20) return false;
    for (size_t i = 0; i < 20; ++i) {
        if (i == 10 || i == 13) {
            if (accession[i] != '-') return false;
        } else if (!std::isdigit(static_cast<unsigned char>(accession[i]))) {
            return false;
        }
    }
    return true;
}

ParseOutcome parse_dissemination(std::string_view raw) {
    FilingSubmission sub;
    bool have_accession = false, have_acceptance = false, have_form = false;
    bool have_cik = false, have_name = false, have_sic = false;

    auto lines = split_lines(raw);
    size_t i = 0;
    // Header region: every tag line before the first <DOCUMENT>.
    for (; i < lines.size(); ++i) {
        std::string_view t = trim(lines[i]);
        if (t == "<DOCUMENT>" || t == "</SUBMISSION>") break;
        std::string_view tag, value;
        if (!parse_tag_line(lines[i], tag, value)) continue;
        if (tag == "ACCESSION-NUMBER" && !have_accession) {
            sub.accession = std::string(value);
            have_accession = true;
        } else if (tag == "ACCEPTANCE-DATETIME" && !have_acceptance) {
            auto t2 = parse_datetime_compact(value);
            if (!t2) return {std::nullopt, "unparseable acceptance datetime '" +
                                               std::string(value) + "'"};
            sub.acceptance = *t2;
            have_acceptance = true;
        } else if (tag == "TYPE" && !have_form) {
            sub.form_type = std::string(value);
            have_form = true;
        } else if (tag == "CONFORMED-NAME" && !have_name) {
            sub.company_name = std::string(value);
            have_name = true;
        } else if (tag == "CIK" && !have_cik) {
            uint64_t cik = 0;
            for (char c : value) {
                if (c < '0' || c > '9') { cik = 0; break; }
                cik = cik * 10 + static_cast<uint64_t>(c - '0');
            }
            sub.cik = cik;
            have_cik = cik > 0 || value == "0";
        } else if (tag == "ASSIGNED-SIC" && !have_sic) {
            int sic = 0;
            bool ok = !value.empty();
            for (char c : value) {
                if (c < '0' || c > '9') { ok = false; break; }
                sic = sic * 10 + (c - '0');
            }
            if (ok) {
                sub.sic = sic;
                have_sic = true;
            }
        }
    }

    if (!have_accession) return {std::nullopt, "missing accession number"};
    if (!is_valid_accession(sub.accession))
        return {std::nullopt, "malformed accession number '" + sub.accession + "'"};
    if (!have_acceptance)
        return {std::nullopt, "missing acceptance datetime (" + sub.accession + ")"};

    // Document envelopes.
    while (i < lines.size()) {
        std::string_view t = trim(lines[i]);
        if (t != "<DOCUMENT>") {
            ++i;
            continue;
        }
        ++i;
        DocumentRecord doc;
        bool have_seq = false;
        while (i < lines.size()) {
            std::string_view dt = trim(lines[i]);
            if (dt == "</DOCUMENT>") {
                ++i;
                break;
            }
            if (dt == "<TEXT>") {
                ++i;
                size_t body_start = i;
                while (i < lines.size() && trim(lines[i]) != "</TEXT>") ++i;
                // Reassemble body bytes verbatim (bodies are newline-joined).
                std::string body;
                for (size_t j = body_start; j < i; ++j) {
                    body.append(lines[j]);
                    body += '\n';
                }
                if (!body.empty()) body.pop_back();
                doc.raw = std::move(body);
                if (i < lines.size()) ++i;  // consume </TEXT>
                continue;
            }
            std::string_view tag, value;
            if (parse_tag_line(lines[i], tag, value)) {
                if (tag == "TYPE") {
                    doc.doc_type = std::string(value);
                } else if (tag == "SEQUENCE") {
                    int seq = 0;
                    for (char c : value)
                        if (c >= '0' && c <= '9') seq = seq * 10 + (c - '0');
                    doc.sequence = seq;
                    have_seq = seq > 0;
                } else if (tag == "FILENAME") {
                    doc.filename = std::string(value);
                }
            }
            ++i;
        }
        if (!have_seq) doc.sequence = static_cast<int>(sub.documents.size()) + 1;
        doc.content_kind = classify_content(doc.raw);
        sub.documents.push_back(std::move(doc));
    }

    if (sub.documents.empty())
        return {std::nullopt, "no document envelopes (" + sub.accession + ")"};
    return {std::move(sub), ""};
}

// ---------------------------------------------------------------------------
// Content classification
// ---------------------------------------------------------------------------

ContentKind classify_content(std::string_view body) {
    std::string_view head = body.substr(0, std::min<size_t>(body.size(), 4096));

    // Uuencoded payloads start "begin <mode> <name>" on the first content line.
    {
        std::string_view rest = body;
        for (int line = 0; line < 4 && !rest.empty(); ++line) {
            size_t nl = rest.find('\n');
            std::string_view first = trim(rest.substr(0, nl));
            rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
            if (first.empty()) continue;
            if (first.size() > 6 && first.substr(0, 6) == "begin " && first.size() >= 9 &&
                first[6] >= '0' && first[6] <= '7' && first[7] >= '0' && first[7] <= '7' &&
                first[8] >= '0' && first[8] <= '7')
                return ContentKind::kBinaryOrOther;
            break;
        }
    }

    if (head.substr(0, 4) == "%PDF") return ContentKind::kBinaryOrOther;

    // Raw binary: a meaningful share of non-text bytes early in the body.
    {
        size_t non_text = 0;
        for (unsigned char c : head) {
            if (c == '\t' || c == '\n' || c == '\r' || c == '\f') continue;
            if (c < 0x20 || c == 0x7f) ++non_text;
        }
        if (!head.empty() && non_text * 10 > head.size()) return ContentKind::kBinaryOrOther;
    }

    if (ifind(head, "<html") != std::string_view::npos ||
        ifind(head, "<!doctype") != std::string_view::npos)
        return ContentKind::kHtml;

    // Dominant-markup fallback: tags that only appear in HTML filings.  The
    // fixed-width era's layout tags (<PAGE>, <TABLE>, <C>, <S>) are NOT
    // counted — those documents must classify as text.
    static constexpr std::string_view kHtmlTags[] = {"<p>", "<p ",  "<div", "<br",   "<td",
                                                     "<tr", "<font", "<span", "<body", "<b>"};
    size_t hits = 0;
    for (std::string_view tag : kHtmlTags) {
        size_t pos = 0;
        while ((pos = ifind(body, tag, pos)) != std::string_view::npos) {
            ++hits;
            ++pos;
            if (hits >= 5) return ContentKind::kHtml;
        }
    }
    return ContentKind::kFixedWidthText;
}

}  // namespace edgartext
