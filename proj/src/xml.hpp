#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Minimal XML reader covering the filter-document subset: nested elements,
// attributes, comments, self-closing tags and the five standard entities.
// Text content is ignored.
namespace authmine::xml {

struct Node {
  std::string name;
  std::map<std::string, std::string> attrs;
  std::vector<Node> children;

  const std::string* attr(const std::string& key) const {
    auto it = attrs.find(key);
    return it == attrs.end() ? nullptr : &it->second;
  }
};

class XmlError : public std::runtime_error {
 public:
  explicit XmlError(const std::string& message) : std::runtime_error(message) {}
};

/// Returns the single root element. Throws XmlError on malformed input.
Node parse(std::string_view text);

}  // namespace authmine::xml
