#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vizrec::xml {

/// Minimal DOM: elements with attributes, direct text and children.
/// Comments, processing instructions and the doctype are dropped.
struct Node {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::string text;  // concatenated character data directly inside this element
    std::vector<std::unique_ptr<Node>> children;

    std::optional<std::string_view> attr(std::string_view key) const;
    const Node* child(std::string_view child_name) const;

    /// Children with the given name, in document order.
    std::vector<const Node*> children_named(std::string_view child_name) const;

    /// Depth-first, document-order visit of every descendant (excluding this node).
    void for_each_descendant(const std::function<void(const Node&)>& fn) const;

    /// All descendants named `name`, document order.
    std::vector<const Node*> descendants_named(std::string_view descendant_name) const;
};

/// Throws std::runtime_error with a line number when the input is not
/// well-formed (unbalanced tags, bad attribute syntax, unknown entity,
/// multiple roots, trailing garbage).
std::unique_ptr<Node> parse(std::string_view input);

}  // namespace vizrec::xml
