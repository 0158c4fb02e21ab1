#pragma once

// Strict well-formedness checker for the generated reports: a doctype, quoted
// attributes, no duplicate attributes, known void elements only, every other
// element explicitly closed in nesting order, valid character references, and
// raw-text elements closed by their own end tag.

#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bbo::testing {

struct HtmlCheck {
    bool ok = true;
    std::string error;
    std::size_t elements = 0;
};

inline HtmlCheck check_html(const std::string& doc)
{
    static const std::set<std::string> void_elements = {"area", "base", "br", "col", "embed", "hr", "img",
                                                         "input", "link", "meta", "source", "track", "wbr"};
    static const std::set<std::string> raw_text = {"script", "style"};
    HtmlCheck r;
    auto fail = [&](std::size_t pos, const std::string& why) {
        r.ok = false;
        r.error = "offset " + std::to_string(pos) + ": " + why;
        return r;
    };
    auto is_name = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == ':'; };

    auto check_entity = [&](std::size_t& i) -> bool {
        // doc[i] == '&'
        std::size_t j = i + 1;
        if (j < doc.size() && doc[j] == '#') {
            ++j;
            bool hex = j < doc.size() && (doc[j] == 'x' || doc[j] == 'X');
            if (hex) ++j;
            std::size_t start = j;
            while (j < doc.size() && (hex ? std::isxdigit(static_cast<unsigned char>(doc[j]))
                                          : std::isdigit(static_cast<unsigned char>(doc[j]))))
                ++j;
            if (j == start) return false;
        } else {
            std::size_t start = j;
            while (j < doc.size() && std::isalnum(static_cast<unsigned char>(doc[j]))) ++j;
            static const std::set<std::string> named = {"amp", "lt", "gt", "quot", "apos", "nbsp"};
            if (!named.count(doc.substr(start, j - start))) return false;
        }
        if (j >= doc.size() || doc[j] != ';') return false;
        i = j;
        return true;
    };

    std::size_t i = 0;
    const std::string doctype = "<!DOCTYPE html>";
    while (i < doc.size() && std::isspace(static_cast<unsigned char>(doc[i]))) ++i;
    if (doc.compare(i, doctype.size(), doctype) != 0) return fail(i, "missing <!DOCTYPE html>");
    i += doctype.size();

    std::vector<std::string> stack;
    bool saw_root = false;
    while (i < doc.size()) {
        char c = doc[i];
        if (c == '&') {
            if (!check_entity(i)) return fail(i, "bad character reference");
            ++i;
            continue;
        }
        if (c == '>') return fail(i, "stray '>' in text");
        if (c != '<') {
            if (stack.empty() && !std::isspace(static_cast<unsigned char>(c)))
                return fail(i, "text outside the root element");
            ++i;
            continue;
        }
        if (doc.compare(i, 4, "<!--") == 0) {
            auto end = doc.find("-->", i + 4);
            if (end == std::string::npos) return fail(i, "unterminated comment");
            i = end + 3;
            continue;
        }
        bool closing = i + 1 < doc.size() && doc[i + 1] == '/';
        std::size_t j = i + (closing ? 2 : 1);
        std::size_t name_start = j;
        while (j < doc.size() && is_name(doc[j])) ++j;
        if (j == name_start) return fail(i, "'<' not starting a tag");
        std::string name = doc.substr(name_start, j - name_start);
        for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));

        if (closing) {
            while (j < doc.size() && std::isspace(static_cast<unsigned char>(doc[j]))) ++j;
            if (j >= doc.size() || doc[j] != '>') return fail(i, "malformed end tag </" + name + ">");
            if (stack.empty() || stack.back() != name)
                return fail(i, "end tag </" + name + "> does not match " +
                                   (stack.empty() ? std::string("nothing") : "<" + stack.back() + ">"));
            stack.pop_back();
            i = j + 1;
            continue;
        }

        std::set<std::string> attrs;
        bool self_closed = false;
        while (true) {
            while (j < doc.size() && std::isspace(static_cast<unsigned char>(doc[j]))) ++j;
            if (j >= doc.size()) return fail(i, "unterminated tag <" + name + ">");
            if (doc[j] == '>') break;
            if (doc[j] == '/') {
                if (j + 1 >= doc.size() || doc[j + 1] != '>') return fail(j, "stray '/' in tag");
                self_closed = true;
                ++j;
                break;
            }
            std::size_t a = j;
            while (j < doc.size() && is_name(doc[j])) ++j;
            if (j == a) return fail(j, "bad attribute name in <" + name + ">");
            std::string attr = doc.substr(a, j - a);
            if (!attrs.insert(attr).second) return fail(a, "duplicate attribute " + attr);
            if (j < doc.size() && doc[j] == '=') {
                ++j;
                if (j >= doc.size() || (doc[j] != '"' && doc[j] != '\'')) return fail(j, "unquoted attribute value");
                char q = doc[j++];
                while (j < doc.size() && doc[j] != q) {
                    if (doc[j] == '<') return fail(j, "'<' inside attribute value");
                    if (doc[j] == '&' && !check_entity(j)) return fail(j, "bad character reference in attribute");
                    ++j;
                }
                if (j >= doc.size()) return fail(a, "unterminated attribute value");
                ++j;
            }
        }
        ++r.elements;
        if (stack.empty()) {
            if (saw_root) return fail(i, "second root element");
            if (name != "html") return fail(i, "root element is not <html>");
            saw_root = true;
        }
        const bool is_void = void_elements.count(name) > 0;
        // Self-closing syntax is only meaningful on void and SVG elements.
        bool in_svg = false;
        for (const auto& s : stack) in_svg = in_svg || s == "svg";
        if (self_closed && !is_void && !in_svg) return fail(i, "self-closed non-void element <" + name + ">");
        i = j + 1;
        if (is_void || self_closed) continue;
        if (raw_text.count(name)) {
            const std::string end_tag = "</" + name;
            auto end = doc.find(end_tag, i);
            if (end == std::string::npos) return fail(i, "unterminated <" + name + ">");
            i = end;
        }
        stack.push_back(name);
    }
    if (!stack.empty()) return fail(doc.size(), "unclosed <" + stack.back() + ">");
    if (!saw_root) return fail(0, "no root element");
    return r;
}

/// Content of <script ... id="ID">...</script>, if present.
inline std::optional<std::string> script_island(const std::string& doc, const std::string& id)
{
    auto at = doc.find("id=\"" + id + "\"");
    if (at == std::string::npos) return std::nullopt;
    auto open_end = doc.find('>', at);
    auto close = doc.find("</script>", open_end);
    if (open_end == std::string::npos || close == std::string::npos) return std::nullopt;
    return doc.substr(open_end + 1, close - open_end - 1);
}

} // namespace bbo::testing
