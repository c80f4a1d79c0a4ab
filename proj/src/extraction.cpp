#include "edgartext/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "edgartext/strings.hpp"

namespace edgartext {

namespace {

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

/// Trim trailing whitespace and nbsp placeholders.
std::string rstrip_line(std::string s) {
    while (!s.empty() && (is_ws(s.back()) || s.back() == kNbspPlaceholder)) s.pop_back();
    return s;
}

std::string_view lstrip_view(std::string_view s) {
    while (!s.empty() && (is_ws(s.front()) || s.front() == kNbspPlaceholder))
        s.remove_prefix(1);
    return s;
}

bool is_blank(std::string_view s) { return lstrip_view(s).empty(); }

/// Sentence-continuation test for page boundaries: join when the earlier line
/// ends mid-sentence and the later line reads as its continuation.
bool should_join_lines(std::string_view prev, std::string_view next) {
    std::string_view p = trim_right(prev);
    if (p.empty()) return false;
    char last = p.back();
    if (last == '.' || last == '!' || last == '?' || last == ':' || last == ';') return false;
    std::string_view n = lstrip_view(next);
    if (n.empty()) return false;
    char first = n.front();
    if ((first >= 'a' && first <= 'z') || (first >= '0' && first <= '9')) return true;
    for (std::string_view conj : {"And ", "Or ", "But ", "Nor "}) {
        if (n.size() > conj.size() && n.substr(0, conj.size()) == conj) return true;
    }
    return false;
}

/// A line that is exactly one markup tag (layout artifacts such as <CAPTION>,
/// <S>, <C>, <FN> in the fixed-width era).
bool is_tag_only_line(std::string_view line) {
    std::string_view t = trim(line);
    if (t.size() < 3 || t.front() != '<' || t.back() != '>') return false;
    for (size_t i = 1; i + 1 < t.size(); ++i) {
        char c = t[i];
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '/' || c == '-' || c == '.'))
            return false;
    }
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Shared page apparatus
// ---------------------------------------------------------------------------

namespace {

/// Indexes of the first `candidate_lines` non-blank lines of a page.
std::vector<size_t> leading_line_indexes(const PageSegment& page, int candidate_lines) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < page.lines.size() && idx.size() < static_cast<size_t>(candidate_lines);
         ++i) {
        if (!is_blank(page.lines[i])) idx.push_back(i);
    }
    return idx;
}

bool is_continuation_header(std::string_view line) {
    std::string t = to_lower(trim(line));
    static const std::string kSuffix = "(continued)";
    return t.size() >= kSuffix.size() &&
           t.compare(t.size() - kSuffix.size(), kSuffix.size(), kSuffix) == 0;
}

}  // namespace

std::vector<PageSegment> strip_page_headers(std::vector<PageSegment> pages, int candidate_lines,
                                            size_t* removed) {
    size_t removed_count = 0;
    // Normalized leading lines repeated on >= 2 consecutive pages.
    std::set<std::string> repeated;
    std::vector<std::vector<std::string>> normalized(pages.size());
    for (size_t p = 0; p < pages.size(); ++p) {
        for (size_t i : leading_line_indexes(pages[p], candidate_lines))
            normalized[p].push_back(normalize_ws(pages[p].lines[i]));
    }
    for (size_t p = 0; p + 1 < pages.size(); ++p) {
        for (const std::string& line : normalized[p]) {
            if (line.empty()) continue;
            if (std::find(normalized[p + 1].begin(), normalized[p + 1].end(), line) !=
                normalized[p + 1].end())
                repeated.insert(line);
        }
    }

    for (auto& page : pages) {
        std::vector<size_t> doomed;
        for (size_t i : leading_line_indexes(page, candidate_lines)) {
            const std::string& line = page.lines[i];
            if (repeated.count(normalize_ws(line)) || is_continuation_header(line))
                doomed.push_back(i);
        }
        for (auto it = doomed.rbegin(); it != doomed.rend(); ++it) {
            page.lines.erase(page.lines.begin() + static_cast<ptrdiff_t>(*it));
            ++removed_count;
        }
    }
    if (removed) *removed += removed_count;
    return pages;
}

std::vector<std::string> join_pages_unbreaking(const std::vector<PageSegment>& pages,
                                               size_t* joins) {
    std::vector<std::string> out;
    size_t join_count = 0;
    for (const auto& page : pages) {
        size_t first = 0;
        // Check whether this page continues the previous page's sentence.
        if (!out.empty()) {
            size_t last_nonblank = out.size();
            for (size_t i = out.size(); i > 0; --i) {
                if (!is_blank(out[i - 1])) {
                    last_nonblank = i - 1;
                    break;
                }
            }
            size_t next_nonblank = page.lines.size();
            for (size_t i = 0; i < page.lines.size(); ++i) {
                if (!is_blank(page.lines[i])) {
                    next_nonblank = i;
                    break;
                }
            }
            if (last_nonblank < out.size() && next_nonblank < page.lines.size() &&
                should_join_lines(out[last_nonblank], page.lines[next_nonblank])) {
                out.resize(last_nonblank + 1);  // drop trailing blanks
                std::string& target = out.back();
                target = rstrip_line(std::move(target));
                target += ' ';
                target += lstrip_view(page.lines[next_nonblank]);
                first = next_nonblank + 1;
                ++join_count;
            } else {
                out.emplace_back();  // paragraph boundary between pages
            }
        }
        for (size_t i = first; i < page.lines.size(); ++i) out.push_back(page.lines[i]);
    }
    if (joins) *joins += join_count;
    return out;
}

std::string finalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    int newline_run = 0;
    std::string line;
    auto flush_line = [&] {
        for (char& c : line)
            if (c == kNbspPlaceholder) c = ' ';
        while (!line.empty() && is_ws(line.back())) line.pop_back();
        if (line.empty()) {
            ++newline_run;
        } else {
            int separators = out.empty() ? 0 : std::min(newline_run + 1, 2);
            out.append(static_cast<size_t>(separators), '\n');
            out += line;
            newline_run = 0;
        }
        line.clear();
    };
    for (char c : text) {
        if (c == '\n')
            flush_line();
        else
            line += c;
    }
    flush_line();
    return out;
}

// ---------------------------------------------------------------------------
// Fixed-width extraction
// ---------------------------------------------------------------------------

ExtractedDocument extract_text_filing(std::string_view raw, const ExtractionConfig& config) {
    ExtractedDocument doc;
    doc.source_kind = ContentKind::kFixedWidthText;
    doc.stats.input_bytes = raw.size();

    // Pass 1: drop <TABLE>...</TABLE> regions and split pages on <PAGE>.
    std::vector<PageSegment> pages;
    pages.push_back(PageSegment{0, {}});
    int table_depth = 0;
    for (std::string_view line : split_lines(raw)) {
        std::string_view t = trim(line);
        if (istarts_with(t, "<TABLE")) {
            if (table_depth == 0) ++doc.stats.tables_removed;
            ++table_depth;
            continue;
        }
        if (istarts_with(t, "</TABLE")) {
            if (table_depth > 0) --table_depth;
            // A removed table leaves a paragraph boundary, never a splice.
            if (table_depth == 0) pages.back().lines.emplace_back();
            continue;
        }
        if (table_depth > 0) continue;
        if (istarts_with(t, "<PAGE")) {
            pages.push_back(PageSegment{static_cast<int>(pages.size()), {}});
            continue;
        }
        if (is_tag_only_line(t)) {
            // Like removed tables: a dropped markup line leaves a paragraph
            // boundary so surrounding text never splices across it.
            pages.back().lines.emplace_back();
            continue;
        }
        pages.back().lines.push_back(decode_entities(line));
    }

    pages = strip_page_headers(std::move(pages), config.header_candidate_lines,
                               &doc.stats.header_lines_removed);

    // Pass 2: unwrap hard-wrapped paragraphs within each page.  A physical
    // line that reached the wrap margin continues onto the next physical line
    // when that line starts at column 0; short lines and indented lines are
    // deliberate breaks.  The join test always uses the length of the
    // previous *physical* line, not the accumulated logical line.
    for (auto& page : pages) {
        std::vector<std::string> merged_lines;
        size_t prev_physical_len = 0;
        for (auto& raw_line : page.lines) {
            std::string line = rstrip_line(std::move(raw_line));
            bool continues = !merged_lines.empty() && !line.empty() &&
                             !is_blank(merged_lines.back()) &&
                             prev_physical_len >= config.unwrap_min_length &&
                             !is_ws(line[0]) && line[0] != kNbspPlaceholder;
            prev_physical_len = line.size();
            if (continues) {
                merged_lines.back() += ' ';
                merged_lines.back() += line;
            } else {
                merged_lines.push_back(std::move(line));
            }
        }
        page.lines = std::move(merged_lines);
    }

    auto lines = join_pages_unbreaking(pages, &doc.stats.pages_unbroken);
    std::string joined;
    for (const auto& line : lines) {
        joined += line;
        joined += '\n';
    }
    doc.text = finalize_text(joined);
    doc.stats.output_chars = doc.text.size();
    return doc;
}

// ---------------------------------------------------------------------------
// CPT and numeric-table removal
// ---------------------------------------------------------------------------

namespace {

void cpt_walk(const HtmlNode& node, size_t& tags, size_t& alpha) {
    if (node.type == HtmlNode::Type::kText) {
        for (char c : node.text)
            if (is_ascii_alpha(c)) ++alpha;
        return;
    }
    ++tags;
    for (const auto& child : node.children) cpt_walk(*child, tags, alpha);
}

}  // namespace

double compute_cpt(const HtmlNode& table) {
    size_t tags = 0, alpha = 0;
    cpt_walk(table, tags, alpha);
    if (tags == 0) tags = 1;  // unreachable for element roots; guards division
    return static_cast<double>(alpha) / static_cast<double>(tags);
}

size_t remove_numeric_tables(HtmlNode& root, double cpt_min, size_t* kept) {
    size_t removed = 0;
    auto& children = root.children;
    for (size_t i = 0; i < children.size();) {
        HtmlNode& child = *children[i];
        if (child.type == HtmlNode::Type::kElement && child.tag == "table") {
            if (compute_cpt(child) < cpt_min) {
                children.erase(children.begin() + static_cast<ptrdiff_t>(i));
                ++removed;
                continue;  // descendants go with it, uncounted
            }
            if (kept) ++(*kept);
        }
        removed += remove_numeric_tables(child, cpt_min, kept);
        ++i;
    }
    return removed;
}

// ---------------------------------------------------------------------------
// HTML rendering
// ---------------------------------------------------------------------------

namespace {

/// Indentation level from inline style margins: one level per 36pt (half an
/// inch), the customary filing indent unit.
int style_indent_levels(const std::string& style) {
    int levels = 0;
    std::string lower = to_lower(style);
    for (std::string_view prop : {"margin-left", "padding-left", "text-indent"}) {
        size_t pos = lower.find(prop);
        if (pos == std::string::npos) continue;
        pos = lower.find(':', pos);
        if (pos == std::string::npos) continue;
        ++pos;
        while (pos < lower.size() && is_ws(lower[pos])) ++pos;
        double value = 0;
        bool any = false;
        while (pos < lower.size() &&
               ((lower[pos] >= '0' && lower[pos] <= '9') || lower[pos] == '.')) {
            any = true;
            ++pos;
        }
        if (!any) continue;
        size_t num_end = pos;
        size_t num_start = num_end;
        while (num_start > 0 && ((lower[num_start - 1] >= '0' && lower[num_start - 1] <= '9') ||
                                 lower[num_start - 1] == '.'))
            --num_start;
        value = std::atof(lower.substr(num_start, num_end - num_start).c_str());
        std::string unit = lower.substr(pos, 2);
        double per_level = unit == "em" ? 3.0 : 36.0;  // pt/px default
        levels += static_cast<int>(std::lround(value / per_level));
    }
    return std::clamp(levels, 0, 8);
}

class HtmlRenderer {
public:
    explicit HtmlRenderer(const ExtractionConfig& config) : config_(config) {}

    std::vector<PageSegment> render(const HtmlNode& root) {
        walk(root);
        finish_page();
        if (pages_.empty()) pages_.push_back(PageSegment{0, {}});
        return std::move(pages_);
    }

private:
    void walk(const HtmlNode& node) {
        if (node.type == HtmlNode::Type::kText) {
            add_text(node.text);
            return;
        }
        const std::string& tag = node.tag;
        if (tag == "head" || tag == "title" || tag == "meta" || tag == "link") return;

        bool break_before = false, break_after = false;
        if (const std::string* style = node.attr("style")) {
            std::string lower = to_lower(*style);
            for (const auto& pattern : config_.page_break_styles) {
                if (lower.find(pattern) == std::string::npos) continue;
                if (pattern.find("after") != std::string::npos)
                    break_after = true;
                else
                    break_before = true;
            }
        }
        if (tag == "hr" && config_.hr_is_page_break) break_before = true;
        if (break_before) page_break();

        int extra_indent = 0;
        if (const std::string* style = node.attr("style"))
            extra_indent = style_indent_levels(*style);

        if (tag == "br") {
            hard_line_break();
        } else if (tag == "hr") {
            if (!config_.hr_is_page_break) line_break();
        } else if (tag == "p" || (tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' &&
                                  tag[1] <= '6')) {
            blank_break();
            indent_ += extra_indent;
            walk_children(node);
            indent_ -= extra_indent;
            blank_break();
        } else if (tag == "blockquote") {
            blank_break();
            indent_ += 1 + extra_indent;
            walk_children(node);
            indent_ -= 1 + extra_indent;
            blank_break();
        } else if (tag == "div" || tag == "center" || tag == "dt" || tag == "dd" ||
                   tag == "dl") {
            line_break();
            indent_ += extra_indent;
            walk_children(node);
            indent_ -= extra_indent;
            line_break();
        } else if (tag == "ul" || tag == "ol") {
            line_break();
            ++indent_;
            walk_children(node);
            --indent_;
            line_break();
        } else if (tag == "li") {
            line_break();
            walk_children(node);
            line_break();
        } else if (tag == "table") {
            blank_break();
            indent_ += extra_indent;
            walk_children(node);
            indent_ -= extra_indent;
            blank_break();
        } else if (tag == "tr") {
            line_break();
            walk_children(node);
            line_break();
        } else if (tag == "td" || tag == "th") {
            if (line_has_content()) {
                line_ += "  ";  // cell separator
                pending_space_ = false;
            }
            indent_ += extra_indent;
            walk_children(node);
            indent_ -= extra_indent;
        } else if (tag == "pre") {
            line_break();
            add_preformatted(node);
            line_break();
        } else {
            // Inline elements (span, font, b, i, a, ...) and unknown tags.
            indent_ += extra_indent;
            walk_children(node);
            indent_ -= extra_indent;
        }
        if (break_after) page_break();
    }

    void walk_children(const HtmlNode& node) {
        for (const auto& child : node.children) walk(*child);
    }

    bool line_has_content() const {
        for (char c : line_)
            if (!is_ws(c)) return true;
        return false;
    }

    void add_text(std::string_view text) {
        for (char c : text) {
            if (is_ws(c)) {
                pending_space_ = line_has_content() || !line_.empty();
                continue;
            }
            if (line_.empty()) {
                line_.append(static_cast<size_t>(2 * indent_), ' ');
            } else if (pending_space_) {
                line_ += ' ';
            }
            pending_space_ = false;
            line_ += c;
        }
    }

    void add_preformatted(const HtmlNode& node) {
        std::string text;
        collect_text(node, text);
        for (std::string_view raw_line : split_lines(text)) {
            line_ = std::string(raw_line);
            flush_line();
        }
    }

    static void collect_text(const HtmlNode& node, std::string& out) {
        if (node.type == HtmlNode::Type::kText) {
            out += node.text;
            return;
        }
        for (const auto& child : node.children) collect_text(*child, out);
    }

    void flush_line() {
        lines_.push_back(rstrip_line(std::move(line_)));
        line_.clear();
        pending_space_ = false;
    }

    void line_break() {
        if (!line_.empty()) flush_line();
    }

    void hard_line_break() { flush_line(); }  // <br><br> makes a blank line

    void blank_break() {
        line_break();
        if (!lines_.empty() && !lines_.back().empty()) lines_.emplace_back();
    }

    void page_break() {
        line_break();
        finish_page();
    }

    void finish_page() {
        line_break();
        while (!lines_.empty() && lines_.back().empty()) lines_.pop_back();
        if (!lines_.empty())
            pages_.push_back(PageSegment{static_cast<int>(pages_.size()), std::move(lines_)});
        lines_.clear();
    }

    const ExtractionConfig& config_;
    std::vector<PageSegment> pages_;
    std::vector<std::string> lines_;
    std::string line_;
    bool pending_space_ = false;
    int indent_ = 0;
};

}  // namespace

ExtractedDocument extract_html_filing(std::string_view raw, const ExtractionConfig& config) {
    ExtractedDocument doc;
    doc.source_kind = ContentKind::kHtml;
    doc.stats.input_bytes = raw.size();

    HtmlParseResult parsed = parse_html(raw);
    doc.stats.malformed = parsed.malformed;
    doc.stats.tables_removed =
        remove_numeric_tables(*parsed.root, config.cpt_min, &doc.stats.tables_kept);

    HtmlRenderer renderer(config);
    auto pages = renderer.render(*parsed.root);
    pages = strip_page_headers(std::move(pages), config.header_candidate_lines,
                               &doc.stats.header_lines_removed);
    auto lines = join_pages_unbreaking(pages, &doc.stats.pages_unbroken);

    std::string joined;
    for (const auto& line : lines) {
        joined += line;
        joined += '\n';
    }
    doc.text = finalize_text(joined);
    doc.stats.output_chars = doc.text.size();
    return doc;
}

ExtractedDocument extract_document(const DocumentRecord& record, const ExtractionConfig& config) {
    switch (record.content_kind) {
        case ContentKind::kHtml:
            return extract_html_filing(record.raw, config);
        case ContentKind::kFixedWidthText:
            return extract_text_filing(record.raw, config);
        case ContentKind::kBinaryOrOther:
        default: {
            ExtractedDocument doc;
            doc.source_kind = ContentKind::kBinaryOrOther;
            doc.stats.input_bytes = record.raw.size();
            return doc;
        }
    }
}

}  // namespace edgartext
