#include "edgartext/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <map>

#include "edgartext/strings.hpp"

namespace edgartext {

const std::string* HtmlNode::attr(std::string_view name) const {
    for (const auto& [k, v] : attrs)
        if (k == name) return &v;
    return nullptr;
}

namespace {

void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

/// cp1252 codepoints for numeric references 128..159, which old filings use
/// for quotes and dashes (e.g. &#146; = right single quote).
uint32_t cp1252_to_unicode(uint32_t c) {
    static const std::array<uint16_t, 32> kMap = {
        0x20AC, 0x0081, 0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021,
        0x02C6, 0x2030, 0x0160, 0x2039, 0x0152, 0x008D, 0x017D, 0x008F,
        0x0090, 0x2018, 0x2019, 0x201C, 0x201D, 0x2022, 0x2013, 0x2014,
        0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0x009D, 0x017E, 0x0178};
    return kMap[c - 128];
}

const std::map<std::string, uint32_t, std::less<>>& named_entities() {
    static const std::map<std::string, uint32_t, std::less<>> kEntities = {
        {"amp", '&'},      {"lt", '<'},       {"gt", '>'},      {"quot", '"'},
        {"apos", '\''},    {"nbsp", 0xA0},    {"copy", 0xA9},   {"reg", 0xAE},
        {"trade", 0x2122}, {"sect", 0xA7},    {"para", 0xB6},   {"middot", 0xB7},
        {"bull", 0x2022},  {"hellip", 0x2026},{"mdash", 0x2014},{"ndash", 0x2013},
        {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C},{"rdquo", 0x201D},
        {"deg", 0xB0},     {"plusmn", 0xB1},  {"frac12", 0xBD}, {"frac14", 0xBC},
        {"times", 0xD7},   {"divide", 0xF7},  {"cent", 0xA2},   {"pound", 0xA3},
        {"euro", 0x20AC},  {"yen", 0xA5},     {"shy", 0xAD},    {"laquo", 0xAB},
        {"raquo", 0xBB},
    };
    return kEntities;
}

void emit_codepoint(std::string& out, uint32_t cp) {
    if (cp == 0xA0) {
        out += kNbspPlaceholder;
        return;
    }
    if (cp >= 128 && cp <= 159) cp = cp1252_to_unicode(cp);
    if (cp == 0xAD) return;  // soft hyphen: drop
    append_utf8(out, cp);
}

}  // namespace

std::string decode_entities(std::string_view input) {
    std::string out;
    out.reserve(input.size());
    size_t i = 0;
    while (i < input.size()) {
        char c = input[i];
        if (c != '&') {
            out += c;
            ++i;
            continue;
        }
        // Longest plausible entity: &#xHHHHHH; — cap the scan.
        size_t end = input.find(';', i + 1);
        if (end == std::string_view::npos || end - i > 10) {
            out += '&';
            ++i;
            continue;
        }
        std::string_view body = input.substr(i + 1, end - i - 1);
        if (!body.empty() && body[0] == '#') {
            uint32_t cp = 0;
            bool ok = body.size() > 1;
            if (body.size() > 2 && (body[1] == 'x' || body[1] == 'X')) {
                for (size_t j = 2; j < body.size() && ok; ++j) {
                    char h = body[j];
                    if (h >= '0' && h <= '9') cp = cp * 16 + (h - '0');
                    else if (h >= 'a' && h <= 'f') cp = cp * 16 + (h - 'a' + 10);
                    else if (h >= 'A' && h <= 'F') cp = cp * 16 + (h - 'A' + 10);
                    else ok = false;
                }
            } else {
                for (size_t j = 1; j < body.size() && ok; ++j) {
                    char d = body[j];
                    if (d >= '0' && d <= '9') cp = cp * 10 + (d - '0');
                    else ok = false;
                }
            }
            if (ok && cp > 0 && cp <= 0x10FFFF) {
                emit_codepoint(out, cp);
                i = end + 1;
                continue;
            }
        } else {
            auto it = named_entities().find(body);
            if (it != named_entities().end()) {
                emit_codepoint(out, it->second);
                i = end + 1;
                continue;
            }
        }
        out += '&';  // unknown entity: keep the literal
        ++i;
    }
    return out;
}

namespace {

bool is_void_element(std::string_view tag) {
    static constexpr std::string_view kVoid[] = {"br",   "hr",    "img",  "meta",  "link",
                                                 "input", "area",  "base", "col",   "embed",
                                                 "param", "source", "track", "wbr"};
    return std::find(std::begin(kVoid), std::end(kVoid), tag) != std::end(kVoid);
}

bool is_block_start_that_closes_p(std::string_view tag) {
    static constexpr std::string_view kClosers[] = {
        "p",  "div", "table", "ul", "ol", "li", "blockquote", "h1", "h2", "h3",
        "h4", "h5",  "h6",    "pre", "hr", "tr", "td", "th", "dl", "dt", "dd", "center"};
    return std::find(std::begin(kClosers), std::end(kClosers), tag) != std::end(kClosers);
}

struct TagToken {
    std::string name;  // lowercased
    std::vector<std::pair<std::string, std::string>> attrs;
    bool closing = false;
    bool self_closing = false;
};

/// Parse the inside of <...> starting after '<'; returns position after '>'.
size_t parse_tag(std::string_view input, size_t pos, TagToken& tok) {
    size_t i = pos;
    if (i < input.size() && input[i] == '/') {
        tok.closing = true;
        ++i;
    }
    size_t name_start = i;
    while (i < input.size() && (std::isalnum(static_cast<unsigned char>(input[i])) ||
                                input[i] == '-' || input[i] == ':' || input[i] == '!'))
        ++i;
    tok.name = to_lower(input.substr(name_start, i - name_start));
    // Attributes until '>'.
    while (i < input.size() && input[i] != '>') {
        if (is_ws(input[i])) {
            ++i;
            continue;
        }
        if (input[i] == '/') {
            tok.self_closing = true;
            ++i;
            continue;
        }
        size_t attr_start = i;
        while (i < input.size() && input[i] != '=' && input[i] != '>' && input[i] != '/' &&
               !is_ws(input[i]))
            ++i;
        std::string name = to_lower(input.substr(attr_start, i - attr_start));
        std::string value;
        while (i < input.size() && is_ws(input[i])) ++i;
        if (i < input.size() && input[i] == '=') {
            ++i;
            while (i < input.size() && is_ws(input[i])) ++i;
            if (i < input.size() && (input[i] == '"' || input[i] == '\'')) {
                char quote = input[i++];
                size_t val_start = i;
                while (i < input.size() && input[i] != quote) ++i;
                value = std::string(input.substr(val_start, i - val_start));
                if (i < input.size()) ++i;
            } else {
                size_t val_start = i;
                while (i < input.size() && !is_ws(input[i]) && input[i] != '>') ++i;
                value = std::string(input.substr(val_start, i - val_start));
            }
        }
        if (!name.empty()) tok.attrs.emplace_back(std::move(name), std::move(value));
    }
    if (i < input.size()) ++i;  // consume '>'
    return i;
}

}  // namespace

HtmlParseResult parse_html(std::string_view input) {
    HtmlParseResult result;
    result.root = std::make_unique<HtmlNode>();
    result.root->type = HtmlNode::Type::kElement;

    std::vector<HtmlNode*> stack{result.root.get()};

    auto add_text = [&](std::string_view raw) {
        if (raw.empty()) return;
        auto node = std::make_unique<HtmlNode>();
        node->type = HtmlNode::Type::kText;
        node->text = decode_entities(raw);
        stack.back()->children.push_back(std::move(node));
    };

    size_t i = 0;
    while (i < input.size()) {
        size_t lt = input.find('<', i);
        if (lt == std::string_view::npos) {
            add_text(input.substr(i));
            break;
        }
        if (lt > i) add_text(input.substr(i, lt - i));
        i = lt + 1;
        if (i >= input.size()) break;

        // Comments, doctype, processing instructions.
        if (input.compare(i, 3, "!--") == 0) {
            size_t close = input.find("-->", i + 3);
            i = close == std::string_view::npos ? input.size() : close + 3;
            continue;
        }
        if (input[i] == '!' || input[i] == '?') {
            size_t close = input.find('>', i);
            i = close == std::string_view::npos ? input.size() : close + 1;
            continue;
        }
        // A stray '<' not followed by a tag-ish character is literal text.
        if (input[i] != '/' && !std::isalpha(static_cast<unsigned char>(input[i]))) {
            add_text("<");
            continue;
        }

        TagToken tok;
        i = parse_tag(input, i, tok);
        if (tok.name.empty()) continue;

        if (tok.closing) {
            // Pop to the matching open element; ignore if none is open.
            size_t match = stack.size();
            for (size_t d = stack.size(); d > 1; --d) {
                if (stack[d - 1]->tag == tok.name) {
                    match = d - 1;
                    break;
                }
            }
            if (match == stack.size()) {
                result.malformed = true;
            } else {
                stack.resize(match);
            }
            continue;
        }

        // Script/style bodies are dropped wholesale.
        if (tok.name == "script" || tok.name == "style") {
            std::string close = "</" + tok.name;
            size_t end = ifind(input, close, i);
            if (end == std::string_view::npos) break;
            size_t gt = input.find('>', end);
            i = gt == std::string_view::npos ? input.size() : gt + 1;
            continue;
        }

        // Implied closes for the sloppy markup common in filings.
        auto top_is = [&](std::string_view t) { return stack.back()->tag == t; };
        if (is_block_start_that_closes_p(tok.name)) {
            if (top_is("p")) stack.pop_back();
        }
        if (tok.name == "li") {
            if (top_is("li")) stack.pop_back();
        } else if (tok.name == "td" || tok.name == "th") {
            if (top_is("td") || top_is("th")) stack.pop_back();
        } else if (tok.name == "tr") {
            while (top_is("td") || top_is("th")) stack.pop_back();
            if (top_is("tr")) stack.pop_back();
        }

        auto node = std::make_unique<HtmlNode>();
        node->type = HtmlNode::Type::kElement;
        node->tag = std::move(tok.name);
        node->attrs = std::move(tok.attrs);
        HtmlNode* raw_ptr = node.get();
        stack.back()->children.push_back(std::move(node));
        if (!tok.self_closing && !is_void_element(raw_ptr->tag)) stack.push_back(raw_ptr);
    }
    return result;
}

}  // namespace edgartext
