#include "xml.hpp"

#include <cctype>

namespace authmine::xml {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view src) : src_(src) {}

  Node parse_document() {
    skip_misc();
    Node root = parse_element();
    skip_misc();
    if (!at_end()) throw XmlError("trailing content after root element");
    return root;
  }

 private:
  bool at_end() const { return i_ >= src_.size(); }
  char peek(std::size_t off = 0) const { return i_ + off < src_.size() ? src_[i_ + off] : '\0'; }
  void advance(std::size_t n = 1) { i_ += n; }

  bool consume(std::string_view s) {
    if (src_.substr(i_, s.size()) == s) {
      advance(s.size());
      return true;
    }
    return false;
  }

  void skip_ws() {
    while (!at_end() && std::isspace(unsigned(peek()))) advance();
  }

  // whitespace, comments, processing instructions, stray text
  void skip_misc() {
    while (!at_end()) {
      skip_ws();
      if (consume("<!--")) {
        auto end = src_.find("-->", i_);
        if (end == std::string_view::npos) throw XmlError("unterminated comment");
        i_ = end + 3;
        continue;
      }
      if (peek() == '<' && peek(1) == '?') {
        auto end = src_.find("?>", i_);
        if (end == std::string_view::npos) throw XmlError("unterminated processing instruction");
        i_ = end + 2;
        continue;
      }
      if (peek() == '<' || at_end()) break;
      // ignore character data between elements
      while (!at_end() && peek() != '<') advance();
    }
  }

  static bool name_char(char c) {
    return std::isalnum(unsigned(c)) || c == '_' || c == '-' || c == '.' || c == ':';
  }

  std::string read_name() {
    std::string name;
    while (!at_end() && name_char(peek())) {
      name.push_back(peek());
      advance();
    }
    if (name.empty()) throw XmlError("expected name");
    return name;
  }

  std::string decode(std::string_view raw) {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      auto semi = raw.find(';', i);
      if (semi == std::string_view::npos) throw XmlError("malformed entity");
      std::string_view entity = raw.substr(i + 1, semi - i - 1);
      if (entity == "quot")
        out.push_back('"');
      else if (entity == "amp")
        out.push_back('&');
      else if (entity == "lt")
        out.push_back('<');
      else if (entity == "gt")
        out.push_back('>');
      else if (entity == "apos")
        out.push_back('\'');
      else
        throw XmlError("unknown entity &" + std::string(entity) + ";");
      i = semi;
    }
    return out;
  }

  Node parse_element() {
    if (!consume("<")) throw XmlError("expected element");
    Node node;
    node.name = read_name();
    while (true) {
      skip_ws();
      if (consume("/>")) return node;
      if (consume(">")) break;
      std::string key = read_name();
      skip_ws();
      if (!consume("=")) throw XmlError("expected '=' after attribute " + key);
      skip_ws();
      char quote = peek();
      if (quote != '"' && quote != '\'') throw XmlError("expected quoted attribute value");
      advance();
      auto end = src_.find(quote, i_);
      if (end == std::string_view::npos) throw XmlError("unterminated attribute value");
      node.attrs[key] = decode(src_.substr(i_, end - i_));
      i_ = end + 1;
    }
    // children until the closing tag
    while (true) {
      skip_misc();
      if (at_end()) throw XmlError("unterminated element <" + node.name + ">");
      if (peek() == '<' && peek(1) == '/') {
        advance(2);
        std::string closing = read_name();
        skip_ws();
        if (!consume(">")) throw XmlError("malformed closing tag");
        if (closing != node.name)
          throw XmlError("mismatched closing tag </" + closing + "> for <" + node.name + ">");
        return node;
      }
      node.children.push_back(parse_element());
    }
  }

  std::string_view src_;
  std::size_t i_ = 0;
};

}  // namespace

Node parse(std::string_view text) { return Reader(text).parse_document(); }

}  // namespace authmine::xml
