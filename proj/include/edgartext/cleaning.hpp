#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "edgartext/extraction.hpp"

namespace edgartext {

/// Quality-filter settings for the corpus cleaning stage.  Defaults mirror
/// the shipped pipeline: drop structured-data form types, drop documents
/// shorter than 200 words, drop documents whose whitespace share exceeds the
/// 99th-percentile value of 0.41 observed on the full dataset.
struct CleaningConfig {
    std::set<std::string> excluded_forms;  // compared case-insensitively, "/A" stripped
    std::size_t min_words = 200;
    double max_whitespace_fraction = 0.41;
    double whitespace_percentile = 99.0;
};

/// Form types that carry structured data rather than narrative text:
/// ownership reports, institutional holdings tables, and fund portfolio /
/// money-market data filings.
std::set<std::string> default_excluded_forms();

/// Returns a CleaningConfig with default_excluded_forms() pre-loaded.
CleaningConfig default_cleaning_config();

enum class FilterReason {
    kKept,
    kExcludedForm,
    kTooShort,
    kTooWhitespacy,
};

struct FilterVerdict {
    bool keep = false;
    FilterReason reason = FilterReason::kKept;
};

std::string_view filter_reason_name(FilterReason reason);

/// True iff the form type, uppercased and with a trailing amendment suffix
/// "/A" removed, appears in the exclusion set.
bool is_excluded_form(std::string_view form_type, const CleaningConfig& config);

/// Number of maximal non-whitespace runs.
std::size_t word_count(std::string_view text);

/// Whitespace characters / total characters.  Throws std::invalid_argument on
/// empty text — the fraction is undefined and callers must short-circuit on
/// the word-count rule first.
double whitespace_fraction(std::string_view text);

/// Applies the filter rules in fixed order — excluded form, then word count,
/// then whitespace fraction — and reports the first rule that fails.  Word
/// count below min_words drops (strict <); whitespace fraction above
/// max_whitespace_fraction drops (strict >).  Never throws: empty text can
/// only reach the whitespace rule when min_words is 0, and is kept.
FilterVerdict clean_filter(const ExtractedDocument& doc, std::string_view form_type,
                           const CleaningConfig& config);

/// Nearest-rank percentile of per-document whitespace fractions: with the
/// values sorted ascending, returns the value at rank ceil(p/100 * N).
/// Throws std::invalid_argument on an empty stream.
double compute_whitespace_percentile(const std::vector<double>& fractions, double percentile);

}  // namespace edgartext
