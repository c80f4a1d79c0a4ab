#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace edgartext {

/// Placeholder byte for a decoded non-breaking space.  It survives whitespace
/// collapsing (filings indent with &nbsp; runs) and is rewritten to a plain
/// space when lines are assembled.
inline constexpr char kNbspPlaceholder = '\x01';

struct HtmlNode {
    enum class Type { kElement, kText };

    Type type = Type::kElement;
    std::string tag;  // lowercased; empty for text nodes
    std::vector<std::pair<std::string, std::string>> attrs;
    std::string text;  // text nodes only, entities decoded
    std::vector<std::unique_ptr<HtmlNode>> children;

    /// First value for an attribute name (lowercased), or nullptr.
    const std::string* attr(std::string_view name) const;
};

struct HtmlParseResult {
    std::unique_ptr<HtmlNode> root;  // synthetic root element, tag ""
    bool malformed = false;          // mismatched close tags were seen
};

/// Lenient HTML parser for two decades of heterogeneous filing markup: never
/// throws on bad input.  Unknown tags become ordinary elements, mismatched
/// close tags are dropped (flagging the document as malformed), unclosed
/// elements are closed at end of input, and script/style bodies are discarded.
HtmlParseResult parse_html(std::string_view input);

/// Decode character entities to UTF-8.  Numeric references in the 128..159
/// range are interpreted as cp1252 (the de facto encoding of older filings);
/// &nbsp;/&#160; become kNbspPlaceholder.
std::string decode_entities(std::string_view input);

}  // namespace edgartext
