#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "edgartext/edgar_client.hpp"
#include "edgartext/gzip.hpp"
#include "edgartext/tar.hpp"

using namespace edgartext;
namespace fs = std::filesystem;

namespace {

const char* kSubmissionFixture =
    "<SUBMISSION>\n"
    "<ACCESSION-NUMBER>0000320193-14-000001\n"
    "<TYPE>10-K\n"
    "<PUBLIC-DOCUMENT-COUNT>2\n"
    "<ACCEPTANCE-DATETIME>20140101120000\n"
    "<PERIOD>20131231\n"
    "<FILER>\n"
    "<COMPANY-DATA>\n"
    "<CONFORMED-NAME>EXAMPLE MANUFACTURING CORP\n"
    "<CIK>0000320193\n"
    "<ASSIGNED-SIC>3571\n"
    "</COMPANY-DATA>\n"
    "</FILER>\n"
    "<DOCUMENT>\n"
    "<TYPE>10-K\n"
    "<SEQUENCE>1\n"
    "<FILENAME>example-10k.htm\n"
    "<DESCRIPTION>ANNUAL REPORT\n"
    "<TEXT>\n"
    "<html><body><p>Annual report narrative.</p></body></html>\n"
    "</TEXT>\n"
    "</DOCUMENT>\n"
    "<DOCUMENT>\n"
    "<TYPE>EX-10.1\n"
    "<SEQUENCE>2\n"
    "<FILENAME>exhibit101.txt\n"
    "<TEXT>\n"
    "Material contract text line.\n"
    "</TEXT>\n"
    "</DOCUMENT>\n"
    "</SUBMISSION>\n";

fs::path make_temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("edgartext-test-" + tag + "-" +
                                                std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

FetchPolicy test_policy() {
    FetchPolicy policy;
    policy.user_agent_contact = "test@example.com";
    policy.retry_limit = 2;
    policy.backoff_base = std::chrono::milliseconds(500);
    return policy;
}

}  // namespace

TEST_CASE("list_daily_archives covers business days only") {
    auto first = list_daily_archives(Date{1996, 1, 12}, Date{1996, 1, 12}, "{yyyymmdd}.nc.tar.gz");
    REQUIRE(first.size() == 1);
    CHECK(first[0].date == Date{1996, 1, 12});
    CHECK(first[0].url_path == "19960112.nc.tar.gz");
    CHECK(first[0].compression == ArchiveCompression::kGzipTar);

    auto monday = list_daily_archives(Date{2020, 1, 6}, Date{2020, 1, 6}, "{yyyymmdd}.nc.tar.gz");
    CHECK(monday.size() == 1);

    auto weekend = list_daily_archives(Date{2020, 1, 4}, Date{2020, 1, 5}, "{yyyymmdd}.nc.tar.gz");
    CHECK(weekend.empty());
}

TEST_CASE("list_daily_archives rejects out-of-range requests") {
    CHECK_THROWS_WITH_AS(
        list_daily_archives(Date{1995, 12, 29}, Date{1996, 1, 12}, "{yyyymmdd}.nc.tar.gz"),
        doctest::Contains("1996-01-12"), std::invalid_argument);
    CHECK_THROWS_AS(list_daily_archives(Date{2020, 1, 7}, Date{2020, 1, 6}, "x"),
                    std::invalid_argument);
}

TEST_CASE("archive name pattern expansion and compression inference") {
    auto refs = list_daily_archives(Date{2001, 3, 9}, Date{2001, 3, 9}, "{yyyy}/{mm}/{dd}.tar");
    REQUIRE(refs.size() == 1);
    CHECK(refs[0].url_path == "2001/03/09.tar");
    CHECK(refs[0].compression == ArchiveCompression::kPlain);
}

TEST_CASE("fetch policy validation") {
    FetchPolicy p = test_policy();
    CHECK_NOTHROW(p.validate());
    p.max_requests_per_second = 11.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = test_policy();
    p.user_agent_contact.clear();
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("fetch_archive stores, checksums, and is idempotent") {
    fs::path remote = make_temp_dir("remote");
    fs::path cache = make_temp_dir("cache");
    std::string payload = gzip_compress(write_tar({{"a.nc", kSubmissionFixture}}));
    {
        std::ofstream out(remote / "20140101.nc.tar.gz", std::ios::binary);
        out << payload;
    }

    EdgarClient client(remote.string(), test_policy(), cache);
    int transport_calls = 0;
    client.set_transport([&](const std::string& path) {
        ++transport_calls;
        std::ifstream in(remote / path, std::ios::binary);
        if (!in) return HttpResponse{404, ""};
        std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return HttpResponse{200, std::move(body)};
    });

    ArchiveRef ref{Date{2014, 1, 1}, "20140101.nc.tar.gz", ArchiveCompression::kGzipTar};
    auto first = client.fetch_archive(ref);
    CHECK(transport_calls == 1);
    CHECK_FALSE(first.from_cache);
    CHECK(first.path == cache / "2014/01/01/20140101.nc.tar.gz");
    CHECK(fs::exists(first.path));
    CHECK(fs::exists(cache / "2014/01/01/20140101.nc.tar.gz.sha256"));

    auto second = client.fetch_archive(ref);
    CHECK(transport_calls == 1);  // no network transfer on the second call
    CHECK(second.from_cache);
    CHECK(second.sha256 == first.sha256);

    // A corrupted cache file is detected and refetched.
    {
        std::ofstream out(first.path, std::ios::binary | std::ios::trunc);
        out << "garbage";
    }
    auto third = client.fetch_archive(ref);
    CHECK(transport_calls == 2);
    CHECK_FALSE(third.from_cache);
    CHECK(third.sha256 == first.sha256);

    fs::remove_all(remote);
    fs::remove_all(cache);
}

TEST_CASE("repeated 429 responses exhaust retries into a rate-limit error") {
    fs::path cache = make_temp_dir("cache429");
    FetchPolicy policy = test_policy();  // retry_limit = 2
    EdgarClient client("ignored-dir", policy, cache);

    int calls = 0;
    client.set_transport([&](const std::string&) {
        ++calls;
        return HttpResponse{429, "slow down"};
    });
    std::vector<std::chrono::milliseconds> sleeps;
    client.set_sleep([&](std::chrono::milliseconds d) { sleeps.push_back(d); });

    ArchiveRef ref{Date{2020, 1, 6}, "20200106.nc.tar.gz", ArchiveCompression::kGzipTar};
    CHECK_THROWS_AS(client.fetch_archive(ref), RateLimitError);
    CHECK(calls == 3);  // initial attempt + 2 retries
    REQUIRE(sleeps.size() == 2);
    CHECK(sleeps[0] == std::chrono::milliseconds(500));
    CHECK(sleeps[1] == std::chrono::milliseconds(1000));  // exponential backoff

    fs::remove_all(cache);
}

TEST_CASE("missing archive surfaces the date") {
    fs::path cache = make_temp_dir("cache404");
    EdgarClient client("ignored-dir", test_policy(), cache);
    client.set_transport([](const std::string&) { return HttpResponse{404, ""}; });

    ArchiveRef ref{Date{2020, 1, 6}, "20200106.nc.tar.gz", ArchiveCompression::kGzipTar};
    try {
        client.fetch_archive(ref);
        FAIL("expected MissingArchiveError");
    } catch (const MissingArchiveError& e) {
        CHECK(e.date == Date{2020, 1, 6});
        CHECK(std::string(e.what()).find("2020-01-06") != std::string::npos);
    }
    fs::remove_all(cache);
}

TEST_CASE("fetches are paced by the shared rate limiter") {
    fs::path cache = make_temp_dir("cachepace");
    FetchPolicy policy = test_policy();
    policy.max_requests_per_second = 2.0;
    EdgarClient client("ignored-dir", policy, cache);

    using namespace std::chrono;
    steady_clock::time_point now{};
    std::vector<milliseconds> waits;
    client.set_rate_limiter(std::make_shared<RateLimiter>(
        2.0, [&] { return now; },
        [&](RateLimiter::Duration d) {
            waits.push_back(duration_cast<milliseconds>(d));
            now += d;
        }));
    client.set_transport([&](const std::string& path) {
        return HttpResponse{200, "payload for " + path};
    });

    for (unsigned day = 6; day <= 8; ++day) {
        char name[32];
        std::snprintf(name, sizeof(name), "202001%02u.nc.tar.gz", day);
        client.fetch_archive(ArchiveRef{Date{2020, 1, day}, name, ArchiveCompression::kGzipTar});
    }
    REQUIRE(waits.size() == 2);
    CHECK(waits[0] == milliseconds(500));
    CHECK(waits[1] == milliseconds(500));
    fs::remove_all(cache);
}

TEST_CASE("unpack preserves member order and skips corrupt members") {
    std::vector<TarEntry> entries{
        {"0000000001.nc", "first submission"},
        {"0000000002.nc", "second submission"},
        {"0000000003.nc", "third submission"},
    };
    std::string tar_bytes = write_tar(entries);

    auto intact = unpack_archive_bytes(gzip_compress(tar_bytes), ArchiveCompression::kGzipTar);
    REQUIRE(intact.submissions.size() == 3);
    CHECK(intact.submissions[0] == "first submission");
    CHECK(intact.submissions[2] == "third submission");
    CHECK(intact.skipped.empty());

    // Corrupt the middle member's header: 2 items survive, 1 skip recorded.
    std::string damaged = tar_bytes;
    for (size_t i = 0; i < 8; ++i) damaged[1024 + 148 + i] = 'Z';
    auto partial = unpack_archive_bytes(gzip_compress(damaged), ArchiveCompression::kGzipTar);
    CHECK(partial.submissions.size() == 2);
    CHECK(partial.skipped.size() == 1);

    // Empty archive is success, not an error.
    auto empty = unpack_archive_bytes(gzip_compress(write_tar({})), ArchiveCompression::kGzipTar);
    CHECK(empty.submissions.empty());
    CHECK(empty.skipped.empty());

    // Corrupt container is fatal.
    CHECK_THROWS_AS(unpack_archive_bytes("not gzip", ArchiveCompression::kGzipTar), FetchError);
}

TEST_CASE("parse_dissemination populates metadata and documents") {
    auto outcome = parse_dissemination(kSubmissionFixture);
    REQUIRE(outcome.submission);
    CHECK(outcome.error.empty());
    const FilingSubmission& sub = *outcome.submission;
    CHECK(sub.accession == "0000320193-14-000001");
    CHECK(sub.cik == 320193);
    CHECK(sub.company_name == "EXAMPLE MANUFACTURING CORP");
    CHECK(sub.form_type == "10-K");
    CHECK(format_datetime_iso(sub.acceptance) == "2014-01-01T12:00:00");
    REQUIRE(sub.sic);
    CHECK(*sub.sic == 3571);
    REQUIRE(sub.documents.size() == 2);
    CHECK(sub.documents[0].sequence == 1);
    CHECK(sub.documents[0].doc_type == "10-K");
    CHECK(sub.documents[0].filename == "example-10k.htm");
    CHECK(sub.documents[0].content_kind == ContentKind::kHtml);
    CHECK(sub.documents[1].sequence == 2);
    CHECK(sub.documents[1].doc_type == "EX-10.1");
    CHECK(sub.documents[1].raw == "Material contract text line.");
    CHECK(sub.documents[1].content_kind == ContentKind::kFixedWidthText);
}

TEST_CASE("acceptance timestamps round-trip at second precision") {
    auto outcome = parse_dissemination(kSubmissionFixture);
    REQUIRE(outcome.submission);
    std::string iso = format_datetime_iso(outcome.submission->acceptance);
    auto parsed = parse_datetime_iso(iso);
    REQUIRE(parsed);
    CHECK(*parsed == outcome.submission->acceptance);
    CHECK(format_datetime_iso(*parsed) == iso);
}

TEST_CASE("submissions missing required metadata are quarantined") {
    std::string no_accession = kSubmissionFixture;
    size_t pos = no_accession.find("<ACCESSION-NUMBER>0000320193-14-000001\n");
    no_accession.erase(pos, std::string("<ACCESSION-NUMBER>0000320193-14-000001\n").size());
    auto out1 = parse_dissemination(no_accession);
    CHECK_FALSE(out1.submission);
    CHECK(out1.error.find("accession") != std::string::npos);

    std::string no_acceptance = kSubmissionFixture;
    pos = no_acceptance.find("<ACCEPTANCE-DATETIME>20140101120000\n");
    no_acceptance.erase(pos, std::string("<ACCEPTANCE-DATETIME>20140101120000\n").size());
    auto out2 = parse_dissemination(no_acceptance);
    CHECK_FALSE(out2.submission);
    CHECK(out2.error.find("acceptance") != std::string::npos);

    auto out3 = parse_dissemination("<SUBMISSION>\n<ACCESSION-NUMBER>bogus\n"
                                    "<ACCEPTANCE-DATETIME>20140101120000\n</SUBMISSION>\n");
    CHECK_FALSE(out3.submission);

    auto out4 = parse_dissemination("<SUBMISSION>\n<ACCESSION-NUMBER>0000320193-14-000001\n"
                                    "<ACCEPTANCE-DATETIME>20140101120000\n</SUBMISSION>\n");
    CHECK_FALSE(out4.submission);
    CHECK(out4.error.find("document") != std::string::npos);
}

TEST_CASE("accession number format validation") {
    CHECK(is_valid_accession("0000320193-14-000001"));
    CHECK_FALSE(is_valid_accession("0000320193-14-00001"));
    CHECK_FALSE(is_valid_accession("0000320193_14_000001"));
    CHECK_FALSE(is_valid_accession("000032019a-14-000001"));
    CHECK_FALSE(is_valid_accession(""));
}

TEST_CASE("content classification") {
    CHECK(classify_content("<html><body>x</body></html>") == ContentKind::kHtml);
    CHECK(classify_content("<!DOCTYPE html><p>y</p>") == ContentKind::kHtml);

    // Fixed-width era: layout tags but no HTML markup.
    std::string fixed =
        "<PAGE>\n"
        "This narrative line is wrapped after eighty characters as the old\n"
        "dissemination format required, with aligned columns below.\n"
        "<TABLE>\n<S> <C>\nRevenue            1,234\n</TABLE>\n";
    CHECK(classify_content(fixed) == ContentKind::kFixedWidthText);

    // HTML detected from markup density even without an <html> root.
    std::string dense =
        "<p>One</p><br><p>Two</p><br><p>Three</p> plain tail text";
    CHECK(classify_content(dense) == ContentKind::kHtml);

    // Uuencoded image body.
    std::string uu = "begin 644 logo.gif\nM1TE&.#EA\n`\nend\n";
    CHECK(classify_content(uu) == ContentKind::kBinaryOrOther);

    CHECK(classify_content("%PDF-1.4 binary stream") == ContentKind::kBinaryOrOther);
    std::string raw_binary(200, '\0');
    CHECK(classify_content(raw_binary) == ContentKind::kBinaryOrOther);
}

TEST_CASE("parsed plus quarantined equals input count") {
    std::vector<std::string> raws{kSubmissionFixture, "<SUBMISSION>\nno fields\n</SUBMISSION>\n",
                                  kSubmissionFixture};
    int parsed = 0, quarantined = 0;
    for (const auto& raw : raws) {
        auto outcome = parse_dissemination(raw);
        if (outcome.submission)
            ++parsed;
        else
            ++quarantined;
    }
    CHECK(parsed == 2);
    CHECK(quarantined == 1);
    CHECK(parsed + quarantined == static_cast<int>(raws.size()));
}

TEST_CASE("unpack then parse is deterministic") {
    std::string tar_bytes = write_tar({{"a.nc", kSubmissionFixture}});
    std::string archive = gzip_compress(tar_bytes);
    auto run = [&] {
        auto unpacked = unpack_archive_bytes(archive, ArchiveCompression::kGzipTar);
        REQUIRE(unpacked.submissions.size() == 1);
        auto outcome = parse_dissemination(unpacked.submissions[0]);
        REQUIRE(outcome.submission);
        return outcome.submission->accession + "|" +
               format_datetime_iso(outcome.submission->acceptance);
    };
    CHECK(run() == run());
}
