#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "edgartext/edgar_client.hpp"
#include "edgartext/html.hpp"

namespace edgartext {

struct ExtractionConfig {
    /// Tables whose characters-per-tag falls strictly below this are removed.
    double cpt_min = 10.0;
    /// Treat <hr> elements as page boundaries (styles with page-break
    /// directives always are).
    bool hr_is_page_break = true;
    std::vector<std::string> page_break_styles{"page-break-before", "page-break-after"};
    /// How many leading non-blank lines per page are header candidates.
    int header_candidate_lines = 3;
    /// Physical lines at least this long are treated as hard-wrapped when the
    /// next line continues at column 0 (the fixed-width era wrapped at 80).
    size_t unwrap_min_length = 65;
};

struct ExtractionStats {
    size_t tables_removed = 0;
    size_t tables_kept = 0;
    size_t pages_unbroken = 0;
    size_t header_lines_removed = 0;
    size_t input_bytes = 0;
    size_t output_chars = 0;
    bool malformed = false;  // lenient HTML parse hit mismatched markup

    bool operator==(const ExtractionStats&) const = default;
};

struct ExtractedDocument {
    std::string text;
    ExtractionStats stats;
    ContentKind source_kind = ContentKind::kFixedWidthText;
};

/// One page of content between page markers/breaks.
struct PageSegment {
    int page_index = 0;
    std::vector<std::string> lines;
};

/// Extract narrative text from a fixed-width (pre-HTML era) filing document:
/// table regions dropped, page apparatus removed, hard-wrapped paragraphs
/// rejoined, newline runs capped at 2.
ExtractedDocument extract_text_filing(std::string_view raw, const ExtractionConfig& config = {});

/// Extract narrative text from an HTML filing document: numeric tables
/// removed by the CPT rule, markup rendered with indentation and list
/// structure, page apparatus removed, newline runs capped at 2.
ExtractedDocument extract_html_filing(std::string_view raw, const ExtractionConfig& config = {});

/// Dispatch by content kind; binary documents yield empty text.
ExtractedDocument extract_document(const DocumentRecord& doc, const ExtractionConfig& config = {});

/// Characters-per-tag for a table subtree: alphabetic characters in text
/// content divided by element tag count (the table element included).
double compute_cpt(const HtmlNode& table);

/// Remove every table subtree with CPT < cpt_min, outermost-first: a removed
/// outer table removes its descendants without counting them.  Returns the
/// number removed; kept tables are counted through `kept`.
size_t remove_numeric_tables(HtmlNode& root, double cpt_min, size_t* kept);

/// Drop lines repeated at the top of consecutive pages and section
/// continuation headers; counts removals through `removed`.
std::vector<PageSegment> strip_page_headers(std::vector<PageSegment> pages, int candidate_lines,
                                            size_t* removed);

/// Concatenate pages, joining sentences that span a page boundary; counts
/// joins through `joins`.
std::vector<std::string> join_pages_unbreaking(const std::vector<PageSegment>& pages,
                                               size_t* joins);

/// Cap newline runs at 2, strip trailing whitespace per line and blank
/// lines at both ends, and normalize non-breaking-space placeholders.
std::string finalize_text(std::string_view text);

}  // namespace edgartext
