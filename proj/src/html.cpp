#include "untrue/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

#include "untrue/text.hpp"

namespace untrue::html {

namespace {

constexpr std::array<std::string_view, 14> kVoidElements = {
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source", "track", "wbr"};

constexpr std::array<std::string_view, 6> kSelfClosingSiblings = {"p", "li", "option", "tr", "td", "th"};

bool is_void(std::string_view tag) {
    return std::find(kVoidElements.begin(), kVoidElements.end(), tag) != kVoidElements.end();
}

bool is_raw_text(std::string_view tag) { return tag == "script" || tag == "style"; }
bool is_rcdata(std::string_view tag) { return tag == "title" || tag == "textarea"; }

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' || c == '.';
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

// Case-insensitive search for "</tag" starting at pos.
std::size_t find_end_tag(std::string_view src, std::size_t pos, std::string_view tag) {
    while (true) {
        pos = src.find("</", pos);
        if (pos == std::string_view::npos) return pos;
        if (lower_ascii(src.substr(pos + 2, tag.size())) == tag) return pos;
        pos += 2;
    }
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    std::vector<Document::Node> run() {
        nodes_.push_back(Document::Node{});
        stack_.push_back(Document::kRoot);
        while (pos_ < src_.size()) {
            if (src_[pos_] == '<' && try_markup()) continue;
            read_text();
        }
        return std::move(nodes_);
    }

private:
    Document::NodeId append(Document::Node node) {
        node.parent = stack_.back();
        nodes_.push_back(std::move(node));
        auto id = nodes_.size() - 1;
        nodes_[stack_.back()].children.push_back(id);
        return id;
    }

    void add_text(std::string text) {
        if (text.empty()) return;
        auto& parent = nodes_[stack_.back()];
        if (!parent.children.empty() && nodes_[parent.children.back()].is_text) {
            nodes_[parent.children.back()].text += text;
            return;
        }
        Document::Node node;
        node.is_text = true;
        node.text = std::move(text);
        append(std::move(node));
    }

    void read_text() {
        auto next = src_.find('<', pos_ + 1);
        if (next == std::string_view::npos) next = src_.size();
        add_text(decode_entities(src_.substr(pos_, next - pos_)));
        pos_ = next;
    }

    // Returns false when the '<' does not start markup; it is then read as text.
    bool try_markup() {
        auto rest = src_.substr(pos_);
        if (rest.substr(0, 4) == "<!--") {
            auto end = src_.find("-->", pos_ + 4);
            pos_ = end == std::string_view::npos ? src_.size() : end + 3;
            return true;
        }
        if (rest.size() >= 2 && (rest[1] == '!' || rest[1] == '?')) {
            auto end = src_.find('>', pos_);
            pos_ = end == std::string_view::npos ? src_.size() : end + 1;
            return true;
        }
        if (rest.size() >= 3 && rest[1] == '/' && std::isalpha(static_cast<unsigned char>(rest[2]))) {
            return read_end_tag();
        }
        if (rest.size() >= 2 && std::isalpha(static_cast<unsigned char>(rest[1]))) {
            return read_start_tag();
        }
        return false;
    }

    bool read_end_tag() {
        std::size_t p = pos_ + 2;
        std::size_t start = p;
        while (p < src_.size() && is_name_char(src_[p])) ++p;
        auto tag = lower_ascii(src_.substr(start, p - start));
        auto end = src_.find('>', p);
        if (end == std::string_view::npos) {
            pos_ = src_.size();
            return true;
        }
        pos_ = end + 1;
        for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
            if (*it == Document::kRoot) break;
            if (nodes_[*it].tag == tag) {
                auto keep = static_cast<std::size_t>(std::distance(it, stack_.rend())) - 1;
                stack_.resize(keep);
                break;
            }
        }
        return true;
    }

    bool read_start_tag() {
        std::size_t p = pos_ + 1;
        std::size_t start = p;
        while (p < src_.size() && is_name_char(src_[p])) ++p;
        Document::Node node;
        node.tag = lower_ascii(src_.substr(start, p - start));

        bool self_closing = false;
        while (true) {
            while (p < src_.size() && is_ws(src_[p])) ++p;
            if (p >= src_.size()) {
                // Unterminated tag: drop it.
                pos_ = src_.size();
                return true;
            }
            if (src_[p] == '>') {
                ++p;
                break;
            }
            if (src_[p] == '/') {
                ++p;
                if (p < src_.size() && src_[p] == '>') {
                    self_closing = true;
                    ++p;
                    break;
                }
                continue;
            }
            std::size_t name_start = p;
            while (p < src_.size() && !is_ws(src_[p]) && src_[p] != '=' && src_[p] != '>' && src_[p] != '/') ++p;
            auto name = lower_ascii(src_.substr(name_start, p - name_start));
            if (name.empty()) {
                ++p;
                continue;
            }
            while (p < src_.size() && is_ws(src_[p])) ++p;
            std::string value;
            if (p < src_.size() && src_[p] == '=') {
                ++p;
                while (p < src_.size() && is_ws(src_[p])) ++p;
                if (p < src_.size() && (src_[p] == '"' || src_[p] == '\'')) {
                    char quote = src_[p++];
                    auto close = src_.find(quote, p);
                    if (close == std::string_view::npos) {
                        pos_ = src_.size();
                        return true;
                    }
                    value = decode_entities(src_.substr(p, close - p));
                    p = close + 1;
                } else {
                    std::size_t vstart = p;
                    while (p < src_.size() && !is_ws(src_[p]) && src_[p] != '>') ++p;
                    value = decode_entities(src_.substr(vstart, p - vstart));
                }
            }
            bool seen = std::any_of(node.attributes.begin(), node.attributes.end(),
                                    [&](const auto& a) { return a.first == name; });
            if (!seen) node.attributes.emplace_back(std::move(name), std::move(value));
        }
        pos_ = p;

        if (std::find(kSelfClosingSiblings.begin(), kSelfClosingSiblings.end(), node.tag) !=
                kSelfClosingSiblings.end() &&
            nodes_[stack_.back()].tag == node.tag) {
            stack_.pop_back();
        }

        auto tag = node.tag;
        if (is_raw_text(tag) || is_rcdata(tag)) {
            auto close = find_end_tag(src_, pos_, tag);
            auto body = src_.substr(pos_, (close == std::string_view::npos ? src_.size() : close) - pos_);
            auto id = append(std::move(node));
            if (is_raw_text(tag)) {
                nodes_[id].text = std::string(body);
            } else {
                stack_.push_back(id);
                add_text(decode_entities(body));
                stack_.pop_back();
            }
            if (close == std::string_view::npos) {
                pos_ = src_.size();
            } else {
                auto gt = src_.find('>', close);
                pos_ = gt == std::string_view::npos ? src_.size() : gt + 1;
            }
            return true;
        }

        auto id = append(std::move(node));
        if (!self_closing && !is_void(tag)) stack_.push_back(id);
        return true;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::vector<Document::Node> nodes_;
    std::vector<Document::NodeId> stack_;
};

struct NamedEntity {
    std::string_view name;
    char32_t cp;
};

constexpr std::array<NamedEntity, 28> kNamedEntities = {{
    {"amp", U'&'},     {"lt", U'<'},       {"gt", U'>'},      {"quot", U'"'},    {"apos", U'\''},
    {"nbsp", 0xA0},    {"ndash", 0x2013},  {"mdash", 0x2014}, {"hellip", 0x2026}, {"lsquo", 0x2018},
    {"rsquo", 0x2019}, {"ldquo", 0x201C},  {"rdquo", 0x201D}, {"laquo", 0xAB},   {"raquo", 0xBB},
    {"copy", 0xA9},    {"euro", 0x20AC},   {"aacute", 0xE1},  {"eacute", 0xE9},  {"iacute", 0xED},
    {"oacute", 0xF3},  {"uacute", 0xFA},   {"atilde", 0xE3},  {"otilde", 0xF5},  {"ccedil", 0xE7},
    {"auml", 0xE4},    {"ouml", 0xF6},     {"uuml", 0xFC},
}};

}  // namespace

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        auto semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back(s[i++]);
            continue;
        }
        auto name = s.substr(i + 1, semi - i - 1);
        char32_t cp = 0;
        if (!name.empty() && name[0] == '#') {
            unsigned value = 0;
            bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
            auto digits = name.substr(hex ? 2 : 1);
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value, hex ? 16 : 10);
            if (!digits.empty() && ec == std::errc{} && ptr == digits.data() + digits.size() && value > 0 &&
                value <= 0x10FFFF && !(value >= 0xD800 && value <= 0xDFFF)) {
                cp = value;
            }
        } else {
            for (const auto& e : kNamedEntities) {
                if (e.name == name) cp = e.cp;
            }
        }
        if (cp == 0) {
            out.push_back(s[i++]);
            continue;
        }
        text::append_utf8(out, cp);
        i = semi + 1;
    }
    return out;
}

Document Document::parse(std::string_view source) {
    Document doc;
    doc.nodes_ = Parser(source).run();
    return doc;
}

std::optional<std::string_view> Document::attribute(NodeId id, std::string_view name) const {
    for (const auto& [key, value] : nodes_[id].attributes) {
        if (key == name) return std::string_view(value);
    }
    return std::nullopt;
}

bool Document::has_attribute(NodeId id, std::string_view name) const { return attribute(id, name).has_value(); }

void Document::collect_text(NodeId id, std::string& out) const {
    const auto& n = nodes_[id];
    if (n.is_text || is_raw_text(n.tag)) {
        out += n.text;
        return;
    }
    bool block = n.tag == "br" || n.tag == "p" || n.tag == "div" || n.tag == "li";
    if (block) out.push_back(' ');
    for (auto child : n.children) collect_text(child, out);
    if (block) out.push_back(' ');
}

std::string Document::text_content(NodeId id) const {
    std::string raw;
    collect_text(id, raw);
    return text::collapse_whitespace(raw);
}

std::vector<Document::NodeId> Document::elements() const {
    std::vector<NodeId> out;
    for (NodeId i = 1; i < nodes_.size(); ++i) {
        if (!nodes_[i].is_text) out.push_back(i);
    }
    return out;
}

std::vector<Document::NodeId> Document::elements_by_tag(std::string_view tag) const {
    std::vector<NodeId> out;
    for (NodeId i = 1; i < nodes_.size(); ++i) {
        if (!nodes_[i].is_text && nodes_[i].tag == tag) out.push_back(i);
    }
    return out;
}

std::optional<Selector> Selector::parse(std::string_view text) {
    Selector sel;
    auto s = text::trim(text);
    if (auto at = s.rfind('@'); at != std::string_view::npos && s.find(']', at) == std::string_view::npos) {
        sel.extract_attribute = lower_ascii(text::trim(s.substr(at + 1)));
        if (sel.extract_attribute.empty()) return std::nullopt;
        s = s.substr(0, at);
    }
    std::size_t i = 0;
    auto read_name = [&]() {
        std::size_t start = i;
        while (i < s.size() && is_name_char(s[i]) && s[i] != '.') ++i;
        return std::string(s.substr(start, i - start));
    };
    sel.tag = lower_ascii(read_name());
    while (i < s.size()) {
        char c = s[i++];
        if (c == '.') {
            auto cls = read_name();
            if (cls.empty()) return std::nullopt;
            sel.classes.push_back(cls);
        } else if (c == '#') {
            sel.id = read_name();
            if (sel.id.empty()) return std::nullopt;
        } else if (c == '[') {
            auto close = s.find(']', i);
            if (close == std::string_view::npos) return std::nullopt;
            auto body = s.substr(i, close - i);
            i = close + 1;
            auto eq = body.find('=');
            auto name = lower_ascii(text::trim(body.substr(0, eq)));
            if (name.empty()) return std::nullopt;
            std::optional<std::string> value;
            if (eq != std::string_view::npos) {
                auto v = text::trim(body.substr(eq + 1));
                if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
                    v = v.substr(1, v.size() - 2);
                }
                value = std::string(v);
            }
            sel.attributes.emplace_back(std::move(name), std::move(value));
        } else {
            return std::nullopt;
        }
    }
    if (sel.tag.empty() && sel.classes.empty() && sel.id.empty() && sel.attributes.empty()) return std::nullopt;
    return sel;
}

bool Selector::matches(const Document& doc, Document::NodeId node) const {
    const auto& n = doc.node(node);
    if (n.is_text) return false;
    if (!tag.empty() && n.tag != tag) return false;
    if (!this->id.empty()) {
        auto node_id = doc.attribute(node, "id");
        if (!node_id || *node_id != this->id) return false;
    }
    if (!classes.empty()) {
        auto cls = doc.attribute(node, "class");
        if (!cls) return false;
        std::vector<std::string_view> tokens;
        std::string_view rest = *cls;
        while (!rest.empty()) {
            auto sp = rest.find_first_of(" \t\n");
            tokens.push_back(rest.substr(0, sp));
            if (sp == std::string_view::npos) break;
            rest = rest.substr(sp + 1);
        }
        for (const auto& want : classes) {
            if (std::find(tokens.begin(), tokens.end(), want) == tokens.end()) return false;
        }
    }
    for (const auto& [name, value] : attributes) {
        auto actual = doc.attribute(node, name);
        if (!actual) return false;
        if (value && *actual != *value) return false;
    }
    return true;
}

std::optional<std::string> Selector::first_value(const Document& doc) const {
    for (auto id : doc.elements()) {
        if (!matches(doc, id)) continue;
        if (!extract_attribute.empty()) {
            auto v = doc.attribute(id, extract_attribute);
            if (!v) continue;
            return std::string(text::trim(*v));
        }
        return doc.text_content(id);
    }
    return std::nullopt;
}

}  // namespace untrue::html
