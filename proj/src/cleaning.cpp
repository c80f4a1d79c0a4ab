#include "edgartext/cleaning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "edgartext/strings.hpp"

namespace edgartext {

std::set<std::string> default_excluded_forms() {
    return {
        // Ownership reports (structured transaction tables).
        "3",
        "4",
        "5",
        // Institutional holdings reports.
        "13F-HR",
        "13F-NT",
        "13F-E",
        // Fund portfolio / census / money-market data filings.
        "N-PORT",
        "N-PORT-EX",
        "N-Q",
        "N-CEN",
        "N-MFP",
        "N-MFP1",
        "N-MFP2",
    };
}

CleaningConfig default_cleaning_config() {
    CleaningConfig config;
    config.excluded_forms = default_excluded_forms();
    return config;
}

std::string_view filter_reason_name(FilterReason reason) {
    switch (reason) {
        case FilterReason::kKept: return "kept";
        case FilterReason::kExcludedForm: return "excluded-form";
        case FilterReason::kTooShort: return "too-short";
        case FilterReason::kTooWhitespacy: return "too-whitespacy";
    }
    return "unknown";
}

bool is_excluded_form(std::string_view form_type, const CleaningConfig& config) {
    std::string normalized = to_upper(trim(form_type));
    if (normalized.size() > 2 && normalized.compare(normalized.size() - 2, 2, "/A") == 0) {
        normalized.resize(normalized.size() - 2);
    }
    for (const auto& excluded : config.excluded_forms) {
        if (iequals(excluded, normalized)) return true;
    }
    return false;
}

std::size_t word_count(std::string_view text) {
    std::size_t count = 0;
    bool in_word = false;
    for (char c : text) {
        if (is_ws(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++count;
        }
    }
    return count;
}

double whitespace_fraction(std::string_view text) {
    if (text.empty()) {
        throw std::invalid_argument("whitespace_fraction: undefined for empty text");
    }
    std::size_t ws = 0;
    for (char c : text) {
        if (is_ws(c)) ++ws;
    }
    return static_cast<double>(ws) / static_cast<double>(text.size());
}

FilterVerdict clean_filter(const ExtractedDocument& doc, std::string_view form_type,
                           const CleaningConfig& config) {
    if (is_excluded_form(form_type, config)) {
        return {false, FilterReason::kExcludedForm};
    }
    if (word_count(doc.text) < config.min_words) {
        return {false, FilterReason::kTooShort};
    }
    if (!doc.text.empty() && whitespace_fraction(doc.text) > config.max_whitespace_fraction) {
        return {false, FilterReason::kTooWhitespacy};
    }
    return {true, FilterReason::kKept};
}

double compute_whitespace_percentile(const std::vector<double>& fractions, double percentile) {
    if (fractions.empty()) {
        throw std::invalid_argument("compute_whitespace_percentile: empty stream");
    }
    if (percentile < 0.0 || percentile > 100.0) {
        throw std::invalid_argument("compute_whitespace_percentile: percentile out of range");
    }
    std::vector<double> sorted = fractions;
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n));
    if (rank == 0) rank = 1;  // nearest-rank convention: percentile 0 maps to the minimum
    return sorted[rank - 1];
}

}  // namespace edgartext
