#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "edgartext/audit.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <future>
#include <random>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "edgartext/det_random.hpp"
#include "edgartext/hashing.hpp"
#include "edgartext/logging.hpp"
#include "edgartext/stats.hpp"
#include "edgartext/strings.hpp"

namespace edgartext {

namespace {

bool is_word_char(char c) {
    return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
}

bool is_upper_ascii(char c) { return c >= 'A' && c <= 'Z'; }

bool is_opening_quote(std::string_view text, std::size_t pos) {
    const char c = text[pos];
    if (c == '"' || c == '\'') return true;
    // UTF-8 curly openers: U+201C (e2 80 9c) and U+2018 (e2 80 98).
    if (pos + 2 < text.size() && static_cast<unsigned char>(c) == 0xE2 &&
        static_cast<unsigned char>(text[pos + 1]) == 0x80) {
        const auto third = static_cast<unsigned char>(text[pos + 2]);
        return third == 0x9C || third == 0x98;
    }
    return false;
}

bool is_closing_trailer(char c) {
    return c == '"' || c == '\'' || c == ')' || c == ']';
}

const std::set<std::string>& abbreviation_guards() {
    static const std::set<std::string> kGuards = {
        "inc.",  "corp.", "co.",  "ltd.",  "l.p.",    "u.s.",  "u.k.", "u.n.",
        "no.",   "nos.",  "mr.",  "mrs.",  "ms.",     "dr.",   "jr.",  "sr.",
        "st.",   "vs.",   "etc.", "e.g.",  "i.e.",    "viz.",  "approx.",
        "dept.", "fig.",  "mo.",  "attn.", "p.o.",
    };
    return kGuards;
}

/// The token ending at `dot_pos` (inclusive), lowercased.
std::string token_ending_at(std::string_view line, std::size_t dot_pos) {
    std::size_t start = dot_pos;
    while (start > 0 && !is_ws(line[start - 1])) --start;
    std::string token(line.substr(start, dot_pos - start + 1));
    for (char& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return token;
}

void flush_sentence(std::string& current, std::vector<std::string>& out) {
    std::string_view trimmed = trim(current);
    if (!trimmed.empty()) out.emplace_back(trimmed);
    current.clear();
}

void split_line_sentences(std::string_view line, std::vector<std::string>& out) {
    std::string current;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        current += c;
        if (c == '.' || c == '!' || c == '?') {
            // Absorb closing quotes/parens into this sentence.
            std::size_t j = i + 1;
            while (j < line.size() && is_closing_trailer(line[j])) {
                current += line[j];
                ++j;
            }
            // Boundary requires whitespace then an uppercase letter or an
            // opening quote, and the preceding token must not be a known
            // abbreviation.
            std::size_t k = j;
            while (k < line.size() && is_ws(line[k])) ++k;
            const bool has_gap = k > j;
            const bool next_starts_sentence =
                k < line.size() && (is_upper_ascii(line[k]) || is_opening_quote(line, k));
            const bool guarded =
                c == '.' && abbreviation_guards().count(token_ending_at(line, i)) != 0;
            if (has_gap && next_starts_sentence && !guarded) {
                flush_sentence(current, out);
                i = k;
                continue;
            }
            i = j;
            continue;
        }
        ++i;
    }
    flush_sentence(current, out);
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!trim(line).empty()) split_line_sentences(line, out);
        if (end == text.size()) break;
        start = end + 1;
    }
    return out;
}

std::string_view axis_key(DescriptorAxis axis) {
    switch (axis) {
        case DescriptorAxis::kGenderSex: return "gender-sex";
        case DescriptorAxis::kSexualOrientation: return "sexual-orientation";
        case DescriptorAxis::kNationality: return "nationality";
        case DescriptorAxis::kRaceEthnicity: return "race-ethnicity";
        case DescriptorAxis::kReligion: return "religion";
    }
    return "unknown";
}

std::string_view axis_display_name(DescriptorAxis axis) {
    switch (axis) {
        case DescriptorAxis::kGenderSex: return "Gender and Sex";
        case DescriptorAxis::kSexualOrientation: return "Sexual Orientation";
        case DescriptorAxis::kNationality: return "Nationality";
        case DescriptorAxis::kRaceEthnicity: return "Race and Ethnicity";
        case DescriptorAxis::kReligion: return "Religion";
    }
    return "Unknown";
}

DescriptorAxis parse_axis(std::string_view key) {
    for (DescriptorAxis axis : kAllAxes) {
        if (axis_key(axis) == key) return axis;
    }
    throw std::invalid_argument("unknown descriptor axis: " + std::string(key));
}

const std::set<std::string>& default_descriptor_exclusions() {
    static const std::set<std::string> kExclusions = {"straight", "white", "Black", "bi",
                                                      "pan",      "ace",   "poly"};
    return kExclusions;
}

namespace {

bool is_excluded_term(std::string_view surface, const std::set<std::string>& exclusions) {
    for (const std::string& excluded : exclusions) {
        if (iequals(excluded, surface)) return true;
    }
    return false;
}

bool contains_upper(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return is_upper_ascii(c); });
}

}  // namespace

DescriptorLexicon parse_lexicon(std::string_view csv) {
    DescriptorLexicon lexicon;
    lexicon.exclusions = default_descriptor_exclusions();

    bool any_content = false;
    for (std::string_view line : split_lines(csv)) {
        if (!trim(line).empty()) {
            any_content = true;
            break;
        }
    }
    if (!any_content) {
        Logger::instance().warn("lexicon_empty", {{"rows", 0}});
        return lexicon;
    }

    const auto lines = split_lines(csv);
    if (trim(lines[0]) != "descriptor,axis,canonical") {
        throw std::runtime_error("lexicon: line 1: expected header descriptor,axis,canonical");
    }

    struct RawRow {
        std::size_t line_number;
        LexiconEntry entry;
    };
    std::vector<RawRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string_view line = trim(lines[i]);
        if (line.empty()) continue;
        const auto line_error = [&](const std::string& what) {
            return std::runtime_error("lexicon: line " + std::to_string(i + 1) + ": " + what);
        };
        const auto fields = split(line, ',');
        if (fields.size() != 3) throw line_error("expected 3 fields");
        LexiconEntry entry;
        entry.surface = std::string(trim(fields[0]));
        if (entry.surface.empty()) throw line_error("empty descriptor");
        try {
            entry.axis = parse_axis(trim(fields[1]));
        } catch (const std::invalid_argument& e) {
            throw line_error(e.what());
        }
        entry.canonical = std::string(trim(fields[2]));
        if (entry.canonical.empty()) entry.canonical = entry.surface;
        entry.case_sensitive = contains_upper(entry.surface);
        rows.push_back({i + 1, std::move(entry)});
    }

    // Drop excluded surfaces and variants pointing at excluded canonicals.
    std::vector<RawRow> kept;
    for (RawRow& row : rows) {
        if (is_excluded_term(row.entry.surface, lexicon.exclusions)) continue;
        if (is_excluded_term(row.entry.canonical, lexicon.exclusions)) continue;
        kept.push_back(std::move(row));
    }

    // Every variant's canonical target must itself be an entry on the same axis.
    std::map<std::string, DescriptorAxis> canonical_axes;
    for (const RawRow& row : kept) {
        if (row.entry.surface == row.entry.canonical) {
            canonical_axes.emplace(row.entry.canonical, row.entry.axis);
        }
    }
    for (const RawRow& row : kept) {
        if (row.entry.surface == row.entry.canonical) continue;
        auto it = canonical_axes.find(row.entry.canonical);
        if (it == canonical_axes.end()) {
            throw std::runtime_error("lexicon: line " + std::to_string(row.line_number) +
                                     ": canonical target '" + row.entry.canonical +
                                     "' is not an entry");
        }
        if (it->second != row.entry.axis) {
            throw std::runtime_error("lexicon: line " + std::to_string(row.line_number) +
                                     ": variant axis differs from canonical target's axis");
        }
    }

    for (RawRow& row : kept) lexicon.entries.push_back(std::move(row.entry));
    if (lexicon.entries.empty()) {
        Logger::instance().warn("lexicon_empty", {{"rows", rows.size()}});
    }
    return lexicon;
}

DescriptorLexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("lexicon: cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_lexicon(buf.str());
}

std::vector<DescriptorMatch> find_descriptor_matches(std::string_view text,
                                                     const DescriptorLexicon& lexicon) {
    std::vector<DescriptorMatch> matches;
    const std::string lowered = to_lower(text);
    for (const LexiconEntry& entry : lexicon.entries) {
        const std::string needle =
            entry.case_sensitive ? entry.surface : to_lower(entry.surface);
        const std::string_view haystack =
            entry.case_sensitive ? text : std::string_view(lowered);
        std::size_t from = 0;
        while (from < haystack.size()) {
            const std::size_t pos = haystack.find(needle, from);
            if (pos == std::string_view::npos) break;
            const std::size_t end = pos + needle.size();
            const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
            const bool right_ok = end == text.size() || !is_word_char(text[end]);
            if (left_ok && right_ok) {
                matches.push_back({pos, needle.size(), &entry});
            }
            from = pos + 1;
        }
    }
    std::sort(matches.begin(), matches.end(),
              [](const DescriptorMatch& a, const DescriptorMatch& b) {
                  if (a.position != b.position) return a.position < b.position;
                  if (a.length != b.length) return a.length < b.length;
                  return a.entry->canonical < b.entry->canonical;
              });
    return matches;
}

std::optional<DescriptorHit> assign_descriptor(std::string_view sentence,
                                               const DescriptorLexicon& lexicon) {
    const auto matches = find_descriptor_matches(sentence, lexicon);
    const DescriptorMatch* best = nullptr;
    for (const DescriptorMatch& match : matches) {
        if (best == nullptr) {
            best = &match;
            continue;
        }
        const std::size_t len = match.entry->canonical.size();
        const std::size_t best_len = best->entry->canonical.size();
        if (len != best_len) {
            if (len > best_len) best = &match;
            continue;
        }
        if (match.position != best->position) {
            if (match.position < best->position) best = &match;
            continue;
        }
        if (match.entry->canonical < best->entry->canonical) best = &match;
    }
    if (best == nullptr) return std::nullopt;
    DescriptorHit hit;
    hit.sentence = std::string(sentence);
    hit.descriptor = best->entry->canonical;
    hit.axis = best->entry->axis;
    hit.span_begin = best->position;
    hit.span_length = best->length;
    return hit;
}

std::map<DescriptorAxis, AxisStats> descriptor_prevalence(
    const std::vector<DatasetRecord>& records, const DescriptorLexicon& lexicon) {
    // Canonical form -> axis, for attributing per-descriptor counts.
    std::map<std::string, DescriptorAxis> canonical_axes;
    for (const LexiconEntry& entry : lexicon.entries) {
        canonical_axes.emplace(entry.canonical, entry.axis);
    }

    std::map<std::string, std::map<DescriptorAxis, std::set<std::string>>> filings;
    std::map<std::string, std::size_t> mention_counts;
    for (const DatasetRecord& record : records) {
        auto& filing = filings[record.accession_number];
        for (const DescriptorMatch& match : find_descriptor_matches(record.text, lexicon)) {
            filing[match.entry->axis].insert(match.entry->canonical);
            ++mention_counts[match.entry->canonical];
        }
    }

    const std::size_t total_filings = filings.size();
    std::map<DescriptorAxis, std::size_t> axis_filing_counts;
    std::map<std::string, std::size_t> descriptor_filing_counts;
    for (const auto& [accession, by_axis] : filings) {
        for (const auto& [axis, canonicals] : by_axis) {
            if (canonicals.empty()) continue;
            ++axis_filing_counts[axis];
            for (const std::string& canonical : canonicals) {
                ++descriptor_filing_counts[canonical];
            }
        }
    }

    std::map<DescriptorAxis, AxisStats> result;
    for (DescriptorAxis axis : kAllAxes) {
        AxisStats stats;
        stats.axis = axis;
        stats.filings_with_axis = axis_filing_counts.count(axis) ? axis_filing_counts.at(axis) : 0;
        stats.axis_prevalence =
            total_filings == 0 ? 0.0
                               : static_cast<double>(stats.filings_with_axis) /
                                     static_cast<double>(total_filings);
        result.emplace(axis, std::move(stats));
    }
    for (const auto& [canonical, filing_count] : descriptor_filing_counts) {
        const DescriptorAxis axis = canonical_axes.at(canonical);
        AxisStats& stats = result.at(axis);
        DescriptorStats d;
        d.filing_count = filing_count;
        d.filing_prevalence = static_cast<double>(filing_count) /
                              static_cast<double>(stats.filings_with_axis);
        d.mention_count = mention_counts.at(canonical);
        stats.descriptors.emplace(canonical, d);
    }
    return result;
}

const std::vector<std::string>& pronoun_set_she() {
    static const std::vector<std::string> kSet = {"she", "her", "hers", "herself"};
    return kSet;
}

const std::vector<std::string>& pronoun_set_he() {
    static const std::vector<std::string> kSet = {"he", "him", "his", "himself"};
    return kSet;
}

const std::vector<std::string>& pronoun_set_unknown() {
    static const std::vector<std::string> kSet = {"they",     "them",    "their",      "theirs",
                                                  "theirself", "themself", "themselves"};
    return kSet;
}

const std::vector<std::string>& pronoun_set_first_person() {
    static const std::vector<std::string> kSet = {"i",  "me", "my",  "mine", "myself",
                                                  "we", "us", "our", "ours", "ourselves"};
    return kSet;
}

const std::vector<std::string>& pronoun_set_second_person() {
    static const std::vector<std::string> kSet = {"you", "your", "yours", "yourself",
                                                  "yourselves"};
    return kSet;
}

const std::vector<std::string>& pronoun_set_third_person() {
    static const std::vector<std::string> kSet = {
        "it",   "its",    "itself", "she",      "her",      "hers",       "herself",
        "he",   "him",    "his",    "himself",  "they",     "them",       "their",
        "theirs", "theirself", "themself", "themselves"};
    return kSet;
}

namespace {

bool contains_word(const std::string& lowered_text, const std::string& word) {
    std::size_t from = 0;
    while (from < lowered_text.size()) {
        const std::size_t pos = lowered_text.find(word, from);
        if (pos == std::string::npos) return false;
        const std::size_t end = pos + word.size();
        const bool left_ok = pos == 0 || !is_word_char(lowered_text[pos - 1]);
        const bool right_ok = end == lowered_text.size() || !is_word_char(lowered_text[end]);
        if (left_ok && right_ok) return true;
        from = pos + 1;
    }
    return false;
}

bool contains_any_word(const std::string& lowered_text, const std::vector<std::string>& words) {
    for (const std::string& word : words) {
        if (contains_word(lowered_text, word)) return true;
    }
    return false;
}

double pct(std::size_t numerator, std::size_t denominator) {
    if (denominator == 0) return 0.0;
    return 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator);
}

}  // namespace

PronounReport pronoun_prevalence(const std::vector<DatasetRecord>& records) {
    std::map<std::string, std::string> filing_texts;
    for (const DatasetRecord& record : records) {
        std::string& text = filing_texts[record.accession_number];
        if (!text.empty()) text += '\n';
        text += to_lower(record.text);
    }

    PronounReport report;
    report.total_filings = filing_texts.size();
    std::size_t she = 0, he = 0, unknown = 0, first = 0, second = 0, third = 0;
    for (const auto& [accession, text] : filing_texts) {
        const bool has_she = contains_any_word(text, pronoun_set_she());
        const bool has_he = contains_any_word(text, pronoun_set_he());
        const bool has_unknown = contains_any_word(text, pronoun_set_unknown());
        const bool has_first = contains_any_word(text, pronoun_set_first_person());
        const bool has_second = contains_any_word(text, pronoun_set_second_person());
        const bool has_third = contains_any_word(text, pronoun_set_third_person());
        if (has_she || has_he || has_unknown) ++report.filings_with_gender;
        if (has_first || has_second || has_third) ++report.filings_with_grammatical;
        she += has_she ? 1 : 0;
        he += has_he ? 1 : 0;
        unknown += has_unknown ? 1 : 0;
        first += has_first ? 1 : 0;
        second += has_second ? 1 : 0;
        third += has_third ? 1 : 0;
    }
    report.gender_pct = pct(report.filings_with_gender, report.total_filings);
    report.grammatical_pct = pct(report.filings_with_grammatical, report.total_filings);
    report.she_pct = pct(she, report.filings_with_gender);
    report.he_pct = pct(he, report.filings_with_gender);
    report.unknown_pct = pct(unknown, report.filings_with_gender);
    report.first_person_pct = pct(first, report.filings_with_grammatical);
    report.second_person_pct = pct(second, report.filings_with_grammatical);
    report.third_person_pct = pct(third, report.filings_with_grammatical);
    return report;
}

SampleResult frequency_matched_sample(const std::map<std::string, std::size_t>& reference_counts,
                                      const std::vector<DescriptorHit>& comparison_hits,
                                      std::uint64_t seed) {
    std::map<std::string, std::vector<std::size_t>> hits_by_descriptor;
    for (std::size_t i = 0; i < comparison_hits.size(); ++i) {
        hits_by_descriptor[comparison_hits[i].descriptor].push_back(i);
    }

    SampleResult result;
    std::mt19937_64 rng(seed);
    for (const auto& [descriptor, wanted] : reference_counts) {
        if (wanted == 0) continue;
        const auto it = hits_by_descriptor.find(descriptor);
        const std::size_t available = it == hits_by_descriptor.end() ? 0 : it->second.size();
        const std::size_t take = std::min(wanted, available);
        if (take > 0) {
            std::vector<std::size_t> chosen = sample_indices(rng, available, take);
            std::sort(chosen.begin(), chosen.end());
            for (std::size_t local : chosen) {
                result.sampled.push_back(comparison_hits[it->second[local]]);
            }
        }
        if (wanted > available) {
            result.shortfalls[descriptor] = wanted - available;
        }
    }
    return result;
}

double StubToxicityScorer::score(const std::string& sentence) {
    return static_cast<double>(fnv1a64(sentence) % 10000) / 9999.0;
}

namespace {

HttpToxicityScorer::Response default_http_post(const std::string& url, const std::string& body,
                                               const std::string& api_key) {
    // Split scheme://host[:port] from the path.
    const std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw std::runtime_error("scorer: url missing scheme: " + url);
    }
    const std::size_t path_start = url.find('/', scheme_end + 3);
    const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(30, 0);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("X-Api-Key", api_key);
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
        throw std::runtime_error("scorer: transport error contacting " + base);
    }
    return {res->status, res->body};
}

}  // namespace

HttpToxicityScorer::HttpToxicityScorer(std::string url, std::string api_key)
    : url_(std::move(url)), api_key_(std::move(api_key)) {
    transport_ = [key = api_key_](const std::string& u, const std::string& body) {
        return default_http_post(u, body, key);
    };
}

HttpToxicityScorer::HttpToxicityScorer(std::string url, std::string api_key, Transport transport)
    : url_(std::move(url)), api_key_(std::move(api_key)), transport_(std::move(transport)) {}

double HttpToxicityScorer::score(const std::string& sentence) {
    nlohmann::ordered_json request;
    request["text"] = sentence;
    const Response response = transport_(url_, request.dump());
    if (response.status != 200) {
        throw std::runtime_error("scorer: HTTP status " + std::to_string(response.status));
    }
    const auto parsed = nlohmann::json::parse(response.body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("score") ||
        !parsed.at("score").is_number()) {
        throw std::runtime_error("scorer: malformed response body");
    }
    const double value = parsed.at("score").get<double>();
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::runtime_error("scorer: score out of range");
    }
    return value;
}

std::optional<ScorerEnvConfig> scorer_config_from_env() {
    const char* url = std::getenv("EDGARTEXT_SCORER_URL");
    if (url == nullptr || *url == '\0') return std::nullopt;
    ScorerEnvConfig config;
    config.url = url;
    const char* key = std::getenv("EDGARTEXT_SCORER_KEY");
    if (key != nullptr) config.api_key = key;
    return config;
}

ScoreResult score_sentences(const std::vector<DescriptorHit>& hits, ToxicityScorer& scorer,
                            const ScoreOptions& options) {
    ScoreResult result;
    result.hits.resize(hits.size());

    const auto score_one = [&](std::size_t index) -> std::optional<double> {
        for (std::size_t attempt = 0; attempt <= options.max_retries; ++attempt) {
            try {
                const double value = scorer.score(hits[index].sentence);
                if (value >= 0.0 && value <= 1.0) return value;
            } catch (const std::exception&) {
                // retry
            }
        }
        return std::nullopt;
    };

    const std::size_t in_flight = std::max<std::size_t>(1, options.max_in_flight);
    for (std::size_t begin = 0; begin < hits.size(); begin += in_flight) {
        const std::size_t end = std::min(hits.size(), begin + in_flight);
        if (in_flight == 1 || end - begin == 1) {
            for (std::size_t i = begin; i < end; ++i) {
                result.hits[i] = {hits[i], score_one(i)};
            }
            continue;
        }
        std::vector<std::future<std::optional<double>>> futures;
        futures.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            futures.push_back(std::async(std::launch::async, score_one, i));
        }
        for (std::size_t i = begin; i < end; ++i) {
            result.hits[i] = {hits[i], futures[i - begin].get()};
        }
    }
    for (const ScoredHit& scored : result.hits) {
        if (!scored.score.has_value()) ++result.unscored;
    }
    return result;
}

ReductionReport toxicity_reduction(const std::map<std::string, std::vector<double>>& scores_a,
                                   const std::map<std::string, std::vector<double>>& scores_b) {
    ReductionReport report;
    for (const auto& [descriptor, a_scores] : scores_a) {
        const auto it = scores_b.find(descriptor);
        if (it == scores_b.end()) {
            report.skipped.emplace(descriptor, "absent from comparison corpus");
            continue;
        }
        const std::vector<double>& b_scores = it->second;
        if (a_scores.size() < 2 || b_scores.size() < 2) {
            report.skipped.emplace(descriptor, "fewer than two scored sentences on one side");
            continue;
        }
        const WelchResult welch = welch_t_test(a_scores, b_scores);
        if (welch.mean_b == 0.0) {
            report.skipped.emplace(descriptor, "comparison mean is zero");
            continue;
        }
        ReductionEntry entry;
        entry.descriptor = descriptor;
        entry.mean_a = welch.mean_a;
        entry.mean_b = welch.mean_b;
        entry.reduction_pct = 100.0 * (welch.mean_a - welch.mean_b) / welch.mean_b;
        entry.p_value = welch.p_value;
        entry.n_a = a_scores.size();
        entry.n_b = b_scores.size();
        report.entries.push_back(std::move(entry));
    }
    return report;
}

Ff48Table Ff48Table::parse(std::string_view csv) {
    Ff48Table table;
    const auto lines = split_lines(csv);
    if (lines.empty() || trim(lines[0]) != "sic_low,sic_high,industry") {
        throw std::runtime_error("industry map: line 1: expected header sic_low,sic_high,industry");
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string_view line = trim(lines[i]);
        if (line.empty()) continue;
        const auto line_error = [&](const std::string& what) {
            return std::runtime_error("industry map: line " + std::to_string(i + 1) + ": " + what);
        };
        const auto fields = split(line, ',');
        if (fields.size() != 3) throw line_error("expected 3 fields");
        Range range;
        try {
            std::size_t used = 0;
            range.low = std::stoi(std::string(trim(fields[0])), &used);
            if (used != trim(fields[0]).size()) throw std::invalid_argument("junk");
            range.high = std::stoi(std::string(trim(fields[1])), &used);
            if (used != trim(fields[1]).size()) throw std::invalid_argument("junk");
        } catch (const std::exception&) {
            throw line_error("bad sic bound");
        }
        if (range.low > range.high) throw line_error("sic_low exceeds sic_high");
        range.industry = std::string(trim(fields[2]));
        if (range.industry.empty()) throw line_error("empty industry");
        table.ranges_.push_back(std::move(range));
    }
    std::sort(table.ranges_.begin(), table.ranges_.end(),
              [](const Range& a, const Range& b) { return a.low < b.low; });
    for (std::size_t i = 1; i < table.ranges_.size(); ++i) {
        if (table.ranges_[i - 1].high >= table.ranges_[i].low) {
            throw std::runtime_error("industry map: overlapping ranges for '" +
                                     table.ranges_[i - 1].industry + "' and '" +
                                     table.ranges_[i].industry + "'");
        }
    }
    return table;
}

Ff48Table Ff48Table::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("industry map: cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string Ff48Table::classify(std::optional<int> sic) const {
    if (!sic.has_value()) return "Unclassified";
    // Binary search over non-overlapping sorted ranges.
    std::size_t lo = 0, hi = ranges_.size();
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (ranges_[mid].high < *sic) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if (lo < ranges_.size() && ranges_[lo].low <= *sic && *sic <= ranges_[lo].high) {
        return ranges_[lo].industry;
    }
    return "Unclassified";
}

VolumeReport volume_stats(const std::vector<DatasetRecord>& records, const TokenCounter& counter,
                          const Ff48Table* industries) {
    VolumeReport report;
    report.tokenizer_id = counter.id();
    for (const DatasetRecord& record : records) {
        const std::size_t tokens = counter.count(record.text);
        report.total_tokens += tokens;
        report.tokens_by_year[record.acceptance.date.year] += tokens;
        report.tokens_by_form[record.form_type] += tokens;
        report.tokens_by_cik[record.cik] += tokens;
        if (industries != nullptr) {
            report.tokens_by_industry[industries->classify(record.sic)] += tokens;
        }
        if (record.document_sequence > 1) {
            report.attachment_tokens += tokens;
        } else {
            report.main_tokens += tokens;
        }
    }
    return report;
}

}  // namespace edgartext
