#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace untrue::html {

/// A lenient HTML tree: unknown or mismatched end tags are ignored, unclosed
/// elements are closed at end of input. Script and style contents are kept raw.
class Document {
public:
    using NodeId = std::size_t;
    static constexpr NodeId kRoot = 0;

    struct Node {
        bool is_text = false;
        std::string tag;  // lowercase; empty for text nodes and the root
        std::vector<std::pair<std::string, std::string>> attributes;
        std::string text;  // text nodes and raw-text elements
        NodeId parent = 0;
        std::vector<NodeId> children;
    };

    static Document parse(std::string_view source);

    const Node& node(NodeId id) const { return nodes_[id]; }
    std::size_t size() const { return nodes_.size(); }

    std::optional<std::string_view> attribute(NodeId id, std::string_view name) const;
    bool has_attribute(NodeId id, std::string_view name) const;

    /// Descendant text with whitespace collapsed; raw-text children included verbatim.
    std::string text_content(NodeId id) const;

    /// Element ids in document order.
    std::vector<NodeId> elements() const;
    std::vector<NodeId> elements_by_tag(std::string_view tag) const;

private:
    void collect_text(NodeId id, std::string& out) const;

    std::vector<Node> nodes_;
};

/// Decodes the common named references plus numeric ones.
std::string decode_entities(std::string_view s);

/// A minimal selector: `tag`, `.class`, `#id`, `[attr]`, `[attr=value]`, in any
/// combination, optionally followed by `@attr` to read an attribute instead of
/// the element text. Example: `meta[property=og:title]@content`.
struct Selector {
    std::string tag;
    std::vector<std::string> classes;
    std::string id;
    std::vector<std::pair<std::string, std::optional<std::string>>> attributes;
    std::string extract_attribute;

    static std::optional<Selector> parse(std::string_view text);

    bool matches(const Document& doc, Document::NodeId id) const;

    /// First matching element's value in document order.
    std::optional<std::string> first_value(const Document& doc) const;
};

}  // namespace untrue::html
