#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "edgartext/corpus_model.hpp"

namespace edgartext {

// ---------------------------------------------------------------------------
// Sentence splitting

/// Rule-based splitter: a boundary is [. ! ?] (plus trailing closing quotes
/// or parens) followed by whitespace and an uppercase letter or opening
/// quote, unless the preceding token is a known abbreviation.  Lines are
/// hard boundaries, so list items without terminal punctuation become their
/// own sentences.  Returns trimmed, non-empty sentences.
std::vector<std::string> split_sentences(std::string_view text);

// ---------------------------------------------------------------------------
// Descriptor lexicon

enum class DescriptorAxis {
    kGenderSex,
    kSexualOrientation,
    kNationality,
    kRaceEthnicity,
    kReligion,
};

constexpr DescriptorAxis kAllAxes[] = {
    DescriptorAxis::kGenderSex, DescriptorAxis::kSexualOrientation, DescriptorAxis::kNationality,
    DescriptorAxis::kRaceEthnicity, DescriptorAxis::kReligion};

std::string_view axis_key(DescriptorAxis axis);           // e.g. "race-ethnicity"
std::string_view axis_display_name(DescriptorAxis axis);  // e.g. "Race and Ethnicity"
DescriptorAxis parse_axis(std::string_view key);          // throws on unknown

struct LexiconEntry {
    std::string surface;    // the form matched in text
    std::string canonical;  // the descriptor it counts as (often == surface)
    DescriptorAxis axis = DescriptorAxis::kGenderSex;
    bool case_sensitive = false;  // true iff surface contains an uppercase letter
};

struct DescriptorLexicon {
    std::vector<LexiconEntry> entries;
    std::set<std::string> exclusions;
};

/// Terms dropped from any loaded lexicon because they usually appear in
/// non-demographic senses in business text.
const std::set<std::string>& default_descriptor_exclusions();

/// CSV `descriptor,axis,canonical` (canonical empty = self).  Excluded terms
/// are dropped so they can never match.  Throws std::runtime_error with the
/// line number on malformed rows and on variants whose canonical target is
/// not itself an entry.  An empty file yields an empty lexicon with a warning
/// log line.
DescriptorLexicon parse_lexicon(std::string_view csv);
DescriptorLexicon load_lexicon(const std::filesystem::path& path);

struct DescriptorMatch {
    std::size_t position = 0;
    std::size_t length = 0;  // length of the matched surface form in the text
    const LexiconEntry* entry = nullptr;
};

/// Every word-boundary occurrence of every lexicon entry (word characters
/// are [A-Za-z0-9]); case-sensitive only for entries whose surface form
/// carries an uppercase letter.  Sorted by position, then surface length.
std::vector<DescriptorMatch> find_descriptor_matches(std::string_view text,
                                                     const DescriptorLexicon& lexicon);

struct DescriptorHit {
    std::string document_id;
    std::string sentence;
    std::string descriptor;  // canonical form
    DescriptorAxis axis = DescriptorAxis::kGenderSex;
    std::size_t span_begin = 0;
    std::size_t span_length = 0;
};

/// The sentence's assigned descriptor: the match whose canonical form is
/// longest, ties broken by leftmost occurrence, then lexicographically
/// smallest canonical.  Empty when nothing matches.
std::optional<DescriptorHit> assign_descriptor(std::string_view sentence,
                                               const DescriptorLexicon& lexicon);

// ---------------------------------------------------------------------------
// Prevalence

struct DescriptorStats {
    std::size_t filing_count = 0;       // filings with >= 1 mention
    double filing_prevalence = 0.0;     // conditional on the axis subset
    std::size_t mention_count = 0;      // total occurrences across the corpus
    std::size_t sentence_count = 0;     // filled by the toxicity path
    std::optional<double> mean_toxicity;
};

struct AxisStats {
    DescriptorAxis axis = DescriptorAxis::kGenderSex;
    std::size_t filings_with_axis = 0;
    double axis_prevalence = 0.0;  // against all filings
    std::map<std::string, DescriptorStats> descriptors;
};

/// Filing-level (accession-level) prevalence with conditional denominators:
/// the axis fraction is against all filings; each descriptor's fraction is
/// against the filings mentioning any descriptor of that axis.  All five
/// axes are always present in the result.
std::map<DescriptorAxis, AxisStats> descriptor_prevalence(
    const std::vector<DatasetRecord>& records, const DescriptorLexicon& lexicon);

// ---------------------------------------------------------------------------
// Pronouns

struct PronounCategory {
    std::string_view name;
    const std::vector<std::string>& words;
};

const std::vector<std::string>& pronoun_set_she();
const std::vector<std::string>& pronoun_set_he();
const std::vector<std::string>& pronoun_set_unknown();
const std::vector<std::string>& pronoun_set_first_person();
const std::vector<std::string>& pronoun_set_second_person();
const std::vector<std::string>& pronoun_set_third_person();

struct PronounReport {
    std::size_t total_filings = 0;

    std::size_t filings_with_gender = 0;
    double gender_pct = 0.0;  // of all filings
    double she_pct = 0.0;     // of the gender subset
    double he_pct = 0.0;
    double unknown_pct = 0.0;

    std::size_t filings_with_grammatical = 0;
    double grammatical_pct = 0.0;  // of all filings
    double first_person_pct = 0.0; // of the grammatical subset
    double second_person_pct = 0.0;
    double third_person_pct = 0.0;
};

/// Filing-level pronoun prevalence with the gender categories conditional on
/// filings containing any gender pronoun, and the grammatical-person
/// categories conditional on filings containing any grammatical pronoun.
/// Matching is word-boundary and case-insensitive.
PronounReport pronoun_prevalence(const std::vector<DatasetRecord>& records);

// ---------------------------------------------------------------------------
// Frequency-matched sampling

struct SampleResult {
    std::vector<DescriptorHit> sampled;
    std::map<std::string, std::size_t> shortfalls;  // descriptor -> missing count
};

/// For each reference descriptor with count n, samples min(n, available)
/// comparison hits uniformly without replacement; deterministic for a fixed
/// seed.  Descriptors are processed in sorted order and sampled hits keep
/// their original relative order.
SampleResult frequency_matched_sample(const std::map<std::string, std::size_t>& reference_counts,
                                      const std::vector<DescriptorHit>& comparison_hits,
                                      std::uint64_t seed);

// ---------------------------------------------------------------------------
// Toxicity scoring

class ToxicityScorer {
  public:
    virtual ~ToxicityScorer() = default;
    /// Returns a score in [0, 1]; throws on failure.
    virtual double score(const std::string& sentence) = 0;
};

/// Deterministic offline scorer: hashes the sentence into [0, 1].
class StubToxicityScorer : public ToxicityScorer {
  public:
    double score(const std::string& sentence) override;
};

/// Adapts any callable; handy for tests.
class FunctionToxicityScorer : public ToxicityScorer {
  public:
    explicit FunctionToxicityScorer(std::function<double(const std::string&)> fn)
        : fn_(std::move(fn)) {}
    double score(const std::string& sentence) override { return fn_(sentence); }

  private:
    std::function<double(const std::string&)> fn_;
};

/// HTTP client for an external scoring service.  POSTs {"text": sentence}
/// and expects {"score": fraction}.  The transport is injectable for tests;
/// the default uses a real HTTP client.  Endpoint and key normally come from
/// EDGARTEXT_SCORER_URL / EDGARTEXT_SCORER_KEY.
class HttpToxicityScorer : public ToxicityScorer {
  public:
    struct Response {
        int status = 0;
        std::string body;
    };
    using Transport = std::function<Response(const std::string& url, const std::string& body)>;

    HttpToxicityScorer(std::string url, std::string api_key);
    HttpToxicityScorer(std::string url, std::string api_key, Transport transport);

    double score(const std::string& sentence) override;

  private:
    std::string url_;
    std::string api_key_;
    Transport transport_;
};

struct ScorerEnvConfig {
    std::string url;
    std::string api_key;
};

/// Reads EDGARTEXT_SCORER_URL (and optional EDGARTEXT_SCORER_KEY); empty
/// when no endpoint is configured.
std::optional<ScorerEnvConfig> scorer_config_from_env();

struct ScoredHit {
    DescriptorHit hit;
    std::optional<double> score;  // absent when scoring failed after retries
};

struct ScoreOptions {
    std::size_t max_retries = 2;    // attempts = max_retries + 1
    std::size_t max_in_flight = 4;  // bounded request concurrency
};

struct ScoreResult {
    std::vector<ScoredHit> hits;  // same order as the input
    std::size_t unscored = 0;
};

/// Scores every hit, retrying failures; hits that still fail are kept with
/// an absent score and counted, never dropped.  Output order matches input
/// regardless of concurrency.
ScoreResult score_sentences(const std::vector<DescriptorHit>& hits, ToxicityScorer& scorer,
                            const ScoreOptions& options = {});

// ---------------------------------------------------------------------------
// Toxicity reduction

struct ReductionEntry {
    std::string descriptor;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double reduction_pct = 0.0;  // signed; negative when corpus A is less toxic
    double p_value = 1.0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
};

struct ReductionReport {
    std::vector<ReductionEntry> entries;                // sorted by descriptor
    std::map<std::string, std::string> skipped;         // descriptor -> reason
};

/// Per-descriptor percent change of mean toxicity of corpus A against
/// comparison corpus B — (meanA - meanB) / meanB, as a signed percentage —
/// with a two-tailed Welch t-test p-value.  Descriptors with fewer than two
/// scores on either side, absent from B, or with a zero comparison mean are
/// skipped with a reason.
ReductionReport toxicity_reduction(const std::map<std::string, std::vector<double>>& scores_a,
                                   const std::map<std::string, std::vector<double>>& scores_b);

// ---------------------------------------------------------------------------
// Industry classification

class Ff48Table {
  public:
    /// CSV `sic_low,sic_high,industry`.  Throws std::runtime_error with line
    /// numbers on malformed rows, reversed bounds, or overlapping ranges.
    static Ff48Table parse(std::string_view csv);
    static Ff48Table from_file(const std::filesystem::path& path);

    /// Label of the range containing the code; "Unclassified" when no range
    /// matches or the code is absent.
    std::string classify(std::optional<int> sic) const;

    std::size_t range_count() const { return ranges_.size(); }

  private:
    struct Range {
        int low = 0;
        int high = 0;
        std::string industry;
    };
    std::vector<Range> ranges_;  // sorted by low, non-overlapping
};

// ---------------------------------------------------------------------------
// Volume statistics

struct VolumeReport {
    std::map<int, std::size_t> tokens_by_year;
    std::map<std::string, std::size_t> tokens_by_form;
    std::map<std::int64_t, std::size_t> tokens_by_cik;
    std::map<std::string, std::size_t> tokens_by_industry;
    std::size_t main_tokens = 0;        // document sequence 1
    std::size_t attachment_tokens = 0;  // document sequence > 1
    std::size_t total_tokens = 0;
    std::string tokenizer_id;
};

/// Exact token aggregation by year, form type, firm, and (when a mapping is
/// supplied) industry; attachments are documents with sequence > 1.
VolumeReport volume_stats(const std::vector<DatasetRecord>& records, const TokenCounter& counter,
                          const Ff48Table* industries = nullptr);

}  // namespace edgartext
