#include "vizrec/xml.hpp"

#include <cstdint>
#include <stdexcept>

namespace vizrec::xml {

std::optional<std::string_view> Node::attr(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
        if (k == key) return std::string_view(v);
    }
    return std::nullopt;
}

const Node* Node::child(std::string_view child_name) const {
    for (const auto& c : children) {
        if (c->name == child_name) return c.get();
    }
    return nullptr;
}

std::vector<const Node*> Node::children_named(std::string_view child_name) const {
    std::vector<const Node*> out;
    for (const auto& c : children) {
        if (c->name == child_name) out.push_back(c.get());
    }
    return out;
}

void Node::for_each_descendant(const std::function<void(const Node&)>& fn) const {
    for (const auto& c : children) {
        fn(*c);
        c->for_each_descendant(fn);
    }
}

std::vector<const Node*> Node::descendants_named(std::string_view descendant_name) const {
    std::vector<const Node*> out;
    for_each_descendant([&](const Node& n) {
        if (n.name == descendant_name) out.push_back(&n);
    });
    return out;
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view in) : in_(in) {}

    std::unique_ptr<Node> document() {
        skip_bom();
        skip_misc();
        if (eof() || peek() != '<') fail("expected root element");
        auto root = element(0);
        skip_misc();
        if (!eof()) fail("content after root element");
        return root;
    }

private:
    static constexpr int kMaxDepth = 512;

    std::string_view in_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        std::size_t line = 1;
        for (std::size_t i = 0; i < pos_ && i < in_.size(); ++i) {
            if (in_[i] == '\n') ++line;
        }
        throw std::runtime_error("line " + std::to_string(line) + ": " + what);
    }

    bool eof() const { return pos_ >= in_.size(); }
    char peek() const { return in_[pos_]; }
    bool starts_with(std::string_view s) const { return in_.substr(pos_, s.size()) == s; }

    void expect(std::string_view s) {
        if (!starts_with(s)) fail("expected '" + std::string(s) + "'");
        pos_ += s.size();
    }

    static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

    static bool is_name_start(char c) {
        const auto u = static_cast<unsigned char>(c);
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':' || u >= 0x80;
    }

    static bool is_name_char(char c) {
        return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
    }

    void skip_space() {
        while (!eof() && is_space(peek())) ++pos_;
    }

    void skip_bom() {
        if (starts_with("\xEF\xBB\xBF")) pos_ += 3;
    }

    void skip_until(std::string_view terminator, const char* what) {
        const auto end = in_.find(terminator, pos_);
        if (end == std::string_view::npos) fail(std::string("unterminated ") + what);
        pos_ = end + terminator.size();
    }

    // Prolog / epilog: whitespace, comments, PIs, doctype.
    void skip_misc() {
        for (;;) {
            skip_space();
            if (starts_with("<?")) {
                skip_until("?>", "processing instruction");
            } else if (starts_with("<!--")) {
                skip_until("-->", "comment");
            } else if (starts_with("<!DOCTYPE")) {
                skip_doctype();
            } else {
                return;
            }
        }
    }

    void skip_doctype() {
        int bracket = 0;
        while (!eof()) {
            const char c = in_[pos_++];
            if (c == '[') ++bracket;
            else if (c == ']') --bracket;
            else if (c == '>' && bracket == 0) return;
        }
        fail("unterminated doctype");
    }

    std::string name() {
        if (eof() || !is_name_start(peek())) fail("expected a name");
        const auto start = pos_;
        while (!eof() && is_name_char(peek())) ++pos_;
        return std::string(in_.substr(start, pos_ - start));
    }

    static void append_utf8(std::string& out, std::uint32_t cp) {
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

    // Decodes an entity reference starting at '&'.
    void entity(std::string& out) {
        const auto semi = in_.find(';', pos_);
        if (semi == std::string_view::npos || semi - pos_ > 12) fail("bad entity reference");
        const auto ref = in_.substr(pos_ + 1, semi - pos_ - 1);
        if (ref == "lt") out += '<';
        else if (ref == "gt") out += '>';
        else if (ref == "amp") out += '&';
        else if (ref == "apos") out += '\'';
        else if (ref == "quot") out += '"';
        else if (ref.size() > 1 && ref[0] == '#') {
            std::uint32_t cp = 0;
            const bool hex = ref[1] == 'x' || ref[1] == 'X';
            const auto digits = ref.substr(hex ? 2 : 1);
            if (digits.empty()) fail("bad character reference");
            for (char c : digits) {
                std::uint32_t d;
                if (c >= '0' && c <= '9') d = static_cast<std::uint32_t>(c - '0');
                else if (hex && c >= 'a' && c <= 'f') d = static_cast<std::uint32_t>(c - 'a' + 10);
                else if (hex && c >= 'A' && c <= 'F') d = static_cast<std::uint32_t>(c - 'A' + 10);
                else fail("bad character reference");
                cp = cp * (hex ? 16 : 10) + d;
                if (cp > 0x10FFFF) fail("character reference out of range");
            }
            append_utf8(out, cp);
        } else {
            fail("unknown entity '&" + std::string(ref) + ";'");
        }
        pos_ = semi + 1;
    }

    std::string attribute_value() {
        if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
        const char quote = in_[pos_++];
        std::string out;
        while (!eof() && peek() != quote) {
            const char c = peek();
            if (c == '<') fail("'<' in attribute value");
            if (c == '&') {
                entity(out);
            } else {
                out += c;
                ++pos_;
            }
        }
        if (eof()) fail("unterminated attribute value");
        ++pos_;
        return out;
    }

    std::unique_ptr<Node> element(int depth) {
        if (depth > kMaxDepth) fail("nesting too deep");
        expect("<");
        auto node = std::make_unique<Node>();
        node->name = name();
        for (;;) {
            const bool had_space = !eof() && is_space(peek());
            skip_space();
            if (eof()) fail("unterminated start tag");
            if (starts_with("/>")) {
                pos_ += 2;
                return node;
            }
            if (peek() == '>') {
                ++pos_;
                break;
            }
            if (!had_space) fail("expected whitespace before attribute");
            auto key = name();
            skip_space();
            expect("=");
            skip_space();
            auto value = attribute_value();
            for (const auto& [k, v] : node->attributes) {
                if (k == key) fail("duplicate attribute '" + key + "'");
            }
            node->attributes.emplace_back(std::move(key), std::move(value));
        }

        for (;;) {
            if (eof()) fail("unclosed element <" + node->name + ">");
            if (starts_with("</")) {
                pos_ += 2;
                const auto closing = name();
                if (closing != node->name) {
                    fail("mismatched closing tag </" + closing + "> for <" + node->name + ">");
                }
                skip_space();
                expect(">");
                return node;
            }
            if (starts_with("<!--")) {
                skip_until("-->", "comment");
            } else if (starts_with("<![CDATA[")) {
                pos_ += 9;
                const auto end = in_.find("]]>", pos_);
                if (end == std::string_view::npos) fail("unterminated CDATA section");
                node->text.append(in_.substr(pos_, end - pos_));
                pos_ = end + 3;
            } else if (starts_with("<?")) {
                skip_until("?>", "processing instruction");
            } else if (peek() == '<') {
                node->children.push_back(element(depth + 1));
            } else if (peek() == '&') {
                entity(node->text);
            } else {
                node->text += peek();
                ++pos_;
            }
        }
    }
};

}  // namespace

std::unique_ptr<Node> parse(std::string_view input) { return Parser(input).document(); }

}  // namespace vizrec::xml
