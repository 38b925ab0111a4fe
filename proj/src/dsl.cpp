#include "qlat/dsl.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace qlat {

namespace {

constexpr std::array<std::string_view, 33> kKeywords{
    "query", "directed", "undirected", "node",  "motif", "edge",       "group",
    "rule",  "attr",     "nodes",      "edges", "in",    "repeat",     "chain",
    "config", "count",   "start",      "end",   "iterations", "mode",  "linked",
    "shared", "path",    "loop",       "tree",  "clique", "width",     "depth",
    "true",  "false",    "as",         "head",  "tail"};

bool is_keyword(std::string_view s) {
  return std::find(kKeywords.begin(), kKeywords.end(), s) != kKeywords.end();
}

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

enum class Tok {
  Ident,        // bare identifier or keyword
  QuotedIdent,  // `...`
  String,
  Number,
  Punct,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;  // decoded value for strings/quoted idents, raw otherwise
  SourceSpan span;
};

class Lexer {
 public:
  Lexer(std::string_view src, std::vector<Diagnostic>& diags) : src_(src), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", {line_, col_, 0}});
        return out;
      }
      if (auto t = next()) out.push_back(std::move(*t));
    }
  }

 private:
  char peek(size_t o = 0) const { return pos_ + o < src_.size() ? src_[pos_ + o] : '\0'; }

  void advance(size_t n = 1) {
    for (size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  void lex_error(SourceSpan span, std::string msg) {
    diags_.push_back({Severity::Error, "", std::move(msg), span});
  }

  static void append_utf8(std::string& out, unsigned cp) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  std::optional<Token> next() {
    const int line = line_;
    const int col = col_;
    const size_t start = pos_;
    auto finish = [&](Tok kind, std::string text) {
      return Token{kind, std::move(text), {line, col, static_cast<int>(pos_ - start)}};
    };
    const char c = peek();

    if (is_ident_start(c)) {
      while (is_ident_char(peek())) advance();
      return finish(Tok::Ident, std::string(src_.substr(start, pos_ - start)));
    }
    if (is_digit(c) || (c == '-' && is_digit(peek(1)))) {
      if (c == '-') advance();
      while (is_digit(peek())) advance();
      if (peek() == '.' && is_digit(peek(1))) {
        advance();
        while (is_digit(peek())) advance();
      }
      if (peek() == 'e' || peek() == 'E') {
        size_t o = 1;
        if (peek(1) == '+' || peek(1) == '-') o = 2;
        if (is_digit(peek(o))) {
          advance(o);
          while (is_digit(peek())) advance();
        }
      }
      return finish(Tok::Number, std::string(src_.substr(start, pos_ - start)));
    }
    if (c == '"') {
      advance();
      std::string value;
      while (true) {
        const char d = peek();
        if (pos_ >= src_.size() || d == '\n') {
          lex_error({line, col, static_cast<int>(pos_ - start)}, "unterminated string literal");
          return std::nullopt;
        }
        if (d == '"') {
          advance();
          break;
        }
        if (d == '\\') {
          const char e = peek(1);
          advance(2);
          switch (e) {
            case '"': value.push_back('"'); break;
            case '\\': value.push_back('\\'); break;
            case 'n': value.push_back('\n'); break;
            case 't': value.push_back('\t'); break;
            case 'r': value.push_back('\r'); break;
            case 'u': {
              unsigned cp = 0;
              const auto hex = src_.substr(pos_, 4);
              auto [p, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), cp, 16);
              if (ec != std::errc{} || p != hex.data() + 4) {
                lex_error({line_, col_, 1}, "invalid \\u escape");
              } else {
                advance(4);
                append_utf8(value, cp);
              }
              break;
            }
            default:
              lex_error({line_, col_ - 2, 2}, std::string("unknown escape \\") + e);
          }
          continue;
        }
        value.push_back(d);
        advance();
      }
      return finish(Tok::String, std::move(value));
    }
    if (c == '`') {
      advance();
      std::string value;
      while (true) {
        if (pos_ >= src_.size() || peek() == '\n') {
          lex_error({line, col, static_cast<int>(pos_ - start)}, "unterminated quoted identifier");
          return std::nullopt;
        }
        if (peek() == '`') {
          if (peek(1) == '`') {
            value.push_back('`');
            advance(2);
            continue;
          }
          advance();
          break;
        }
        value.push_back(peek());
        advance();
      }
      if (value.empty()) lex_error({line, col, 2}, "empty quoted identifier");
      return finish(Tok::QuotedIdent, std::move(value));
    }
    static constexpr std::array<std::string_view, 9> kTwo{"->", "--", "==", "!=", "<=", ">=", ".."};
    for (auto p : kTwo) {
      if (!p.empty() && src_.substr(pos_, 2) == p) {
        advance(2);
        return finish(Tok::Punct, std::string(p));
      }
    }
    if (std::string_view("{}();,=.<>:").find(c) != std::string_view::npos) {
      advance();
      return finish(Tok::Punct, std::string(1, c));
    }
    advance();
    lex_error({line, col, 1}, std::string("unexpected character '") + c + "'");
    return std::nullopt;
  }

  std::string_view src_;
  std::vector<Diagnostic>& diags_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct SyntaxError {};

struct Reference {
  std::string id;
  SourceSpan span;
  std::string owner;  // declaring entity/rule id, for messages
};

enum class AttrScope { Node, Edge, NodesIn, EdgesIn };

struct AttrCheck {
  std::string rule_id;
  std::string target;
  AttrScope scope;
  SourceSpan span;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::vector<Diagnostic>& diags)
      : toks_(std::move(toks)), diags_(diags) {}

  QueryRepresentation run() {
    bool braced = false;
    if (is_word("query")) {
      try {
        advance();
        const Token& name = expect_kind(Tok::String, "query name string");
        qr_.name = name.text;
        if (is_word("directed")) {
          qr_.directed = true;
          advance();
        } else if (is_word("undirected")) {
          qr_.directed = false;
          advance();
        }
        expect("{");
        braced = true;
      } catch (const SyntaxError&) {
        synchronize();
      }
    }
    while (!at_end() && !(braced && is_punct("}"))) {
      try {
        declaration();
      } catch (const SyntaxError&) {
        synchronize();
      }
    }
    if (braced) {
      if (is_punct("}"))
        advance();
      else
        error(cur().span, "expected '}' to close the query");
    }
    if (!at_end()) error(cur().span, "unexpected input after the query");
    if (decl_count_ == 0 && !has_errors(diags_))
      diags_.push_back({Severity::Warning, "", "empty query", SourceSpan{1, 1, 0}});
    resolve();
    return std::move(qr_);
  }

  const std::unordered_map<std::string, SourceSpan>& entity_spans() const { return entity_spans_; }
  const std::unordered_map<std::string, SourceSpan>& rule_spans() const { return rule_spans_; }

 private:
  const Token& cur() const { return toks_[pos_]; }
  bool at_end() const { return cur().kind == Tok::End; }
  void advance() {
    if (!at_end()) ++pos_;
  }
  bool is_word(std::string_view w) const { return cur().kind == Tok::Ident && cur().text == w; }
  bool is_punct(std::string_view p) const { return cur().kind == Tok::Punct && cur().text == p; }

  void error(SourceSpan span, std::string msg, std::string subject = {}) {
    diags_.push_back({Severity::Error, std::move(subject), std::move(msg), span});
  }

  [[noreturn]] void fail(std::string what) {
    const Token& t = cur();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    error(t.span, "expected " + what + ", found " + found);
    throw SyntaxError{};
  }

  void expect(std::string_view p) {
    if (!is_punct(p)) fail("'" + std::string(p) + "'");
    advance();
  }
  void expect_word(std::string_view w) {
    if (!is_word(w)) fail("'" + std::string(w) + "'");
    advance();
  }
  const Token& expect_kind(Tok kind, const std::string& what) {
    if (cur().kind != kind) fail(what);
    const Token& t = cur();
    advance();
    return t;
  }

  Token identifier(const std::string& what) {
    const Token& t = cur();
    if (t.kind == Tok::QuotedIdent || (t.kind == Tok::Ident && !is_keyword(t.text))) {
      advance();
      return t;
    }
    fail(what);
  }

  void synchronize() {
    while (!at_end() && !is_punct(";") && !is_punct("}")) advance();
    if (is_punct(";")) advance();
  }

  std::int64_t integer() {
    const Token& t = cur();
    if (t.kind != Tok::Number) fail("integer");
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{} || p != t.text.data() + t.text.size()) {
      error(t.span, "expected integer, found '" + t.text + "'");
      throw SyntaxError{};
    }
    advance();
    return v;
  }

  IntRange range() {
    IntRange r;
    r.lo = r.hi = integer();
    if (is_punct("..")) {
      advance();
      r.hi = integer();
    }
    return r;
  }

  AttrValue literal() {
    const Token& t = cur();
    if (t.kind == Tok::String) {
      advance();
      return AttrValue(t.text);
    }
    if (t.kind == Tok::Number) {
      double d = 0;
      auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), d);
      if (ec != std::errc{} || !std::isfinite(d)) {
        error(t.span, "number out of range '" + t.text + "'");
        throw SyntaxError{};
      }
      advance();
      return AttrValue(d);
    }
    if (is_word("true") || is_word("false")) {
      const bool b = t.text == "true";
      advance();
      return AttrValue(b);
    }
    fail("literal");
  }

  void declare_entity(const Token& id, Entity e, SourceSpan decl) {
    ++decl_count_;
    if (entity_spans_.count(id.text)) {
      error(id.span, "duplicate declaration of " + id.text, id.text);
      return;
    }
    entity_spans_[id.text] = decl;
    qr_.entities.push_back(std::move(e));
  }

  std::string next_rule_id() { return "r" + std::to_string(qr_.rules.size()); }

  void add_rule(Rule r, SourceSpan decl, std::optional<Token> label) {
    ++decl_count_;
    if (label) r.id = label->text;
    if (rule_spans_.count(r.id)) {
      error(label ? label->span : decl, "duplicate rule id " + r.id, r.id);
      return;
    }
    rule_spans_[r.id] = decl;
    qr_.rules.push_back(std::move(r));
  }

  std::optional<Token> rule_label() {
    if (!is_word("as")) return std::nullopt;
    advance();
    return identifier("rule id after 'as'");
  }

  Reference ref(const Token& t, const std::string& owner) { return {t.text, t.span, owner}; }

  void motif_params(MotifConfigRule& cfg, bool& has_nodes) {
    do {
      if (is_word("nodes")) {
        advance();
        expect("=");
        cfg.nodes = range();
        has_nodes = true;
      } else if (is_word("width")) {
        advance();
        expect("=");
        cfg.width = range();
      } else if (is_word("depth")) {
        advance();
        expect("=");
        cfg.depth = range();
      } else {
        fail("'nodes', 'width' or 'depth'");
      }
    } while (is_punct(",") && (advance(), true));
  }

  void declaration() {
    const SourceSpan start = cur().span;
    if (is_word("node")) {
      advance();
      const Token id = identifier("node id");
      expect(";");
      declare_entity(id, Entity{id.text, NodeEntity{}}, id.span);
    } else if (is_word("motif")) {
      advance();
      const Token id = identifier("motif id");
      expect("=");
      const Token kind_tok = cur();
      auto kind = kind_tok.kind == Tok::Ident ? motif_from_name(kind_tok.text) : std::nullopt;
      if (!kind) fail("motif kind (path, loop, tree, clique)");
      advance();
      std::optional<MotifConfigRule> cfg;
      if (is_punct("(")) {
        advance();
        MotifConfigRule c;
        bool has_nodes = false;
        motif_params(c, has_nodes);
        expect(")");
        if (!has_nodes) {
          error(kind_tok.span, "motif " + id.text + " needs a 'nodes' parameter", id.text);
          throw SyntaxError{};
        }
        cfg = c;
      }
      auto label = rule_label();
      expect(";");
      declare_entity(id, Entity{id.text, MotifEntity{*kind}}, id.span);
      if (cfg) {
        const auto before = qr_.rules.size();
        add_rule(Rule{next_rule_id(), id.text, *cfg}, id.span, label);
        if (qr_.rules.size() > before) refs_.push_back(ref(id, qr_.rules.back().id));
      } else if (label) {
        error(label->span, "'as' needs a motif configuration to name", id.text);
      }
    } else if (is_word("edge")) {
      advance();
      const Token id = identifier("edge id");
      expect("=");
      auto endpoint = [&]() {
        const Token t = identifier("node or motif id");
        refs_.push_back(ref(t, id.text));
        EndpointRef e{t.text, Port::None};
        if (is_punct(".")) {
          advance();
          if (is_word("head"))
            e.port = Port::Head;
          else if (is_word("tail"))
            e.port = Port::Tail;
          else
            fail("'head' or 'tail'");
          advance();
        }
        return e;
      };
      EdgeEntity edge;
      edge.source = endpoint();
      if (is_punct("->"))
        edge.directed = true;
      else if (is_punct("--"))
        edge.directed = false;
      else
        fail("'->' or '--'");
      advance();
      edge.target = endpoint();
      expect(";");
      declare_entity(id, Entity{id.text, edge}, id.span);
    } else if (is_word("group")) {
      advance();
      const Token id = identifier("group id");
      expect("=");
      expect("{");
      CustomEntity g;
      do {
        const Token m = identifier("member id");
        refs_.push_back(ref(m, id.text));
        g.members.push_back(m.text);
      } while (is_punct(",") && (advance(), true));
      expect("}");
      expect(";");
      declare_entity(id, Entity{id.text, g}, id.span);
    } else if (is_word("rule")) {
      advance();
      rule_declaration(start);
    } else {
      fail("declaration (node, motif, edge, group or rule)");
    }
  }

  void rule_declaration(SourceSpan start) {
    Rule r;
    r.id = next_rule_id();
    std::vector<Token> targets;
    std::optional<AttrCheck> check;
    if (is_word("attr")) {
      advance();
      AttrScope scope;
      if (is_word("node")) {
        scope = AttrScope::Node;
        advance();
      } else if (is_word("edge")) {
        scope = AttrScope::Edge;
        advance();
      } else if (is_word("nodes")) {
        scope = AttrScope::NodesIn;
        advance();
        expect_word("in");
      } else if (is_word("edges")) {
        scope = AttrScope::EdgesIn;
        advance();
        expect_word("in");
      } else {
        fail("'node', 'edge', 'nodes in' or 'edges in'");
      }
      const Token target = identifier("entity id");
      targets.push_back(target);
      expect(":");
      const Token name = cur();
      if (name.kind != Tok::Ident && name.kind != Tok::QuotedIdent) fail("attribute name");
      advance();
      const Token op_tok = cur();
      auto op = op_tok.kind == Tok::Punct ? parse_op(op_tok.text) : std::nullopt;
      if (!op) fail("comparison operator");
      advance();
      Predicate p{name.text, *op, literal()};
      if (scope == AttrScope::Node || scope == AttrScope::NodesIn)
        r.body = NodeAttrRule{p};
      else
        r.body = EdgeAttrRule{p};
      r.target = target.text;
      check = AttrCheck{"", target.text, scope, target.span};
    } else if (is_word("repeat")) {
      advance();
      const Token target = identifier("entity id");
      targets.push_back(target);
      expect(":");
      expect_word("count");
      expect("=");
      r.target = target.text;
      r.body = RepeatingRule{range()};
    } else if (is_word("chain")) {
      advance();
      const Token target = identifier("entity id");
      targets.push_back(target);
      expect(":");
      ChainingRule c;
      expect_word("start");
      expect("=");
      const Token s = identifier("start node id");
      targets.push_back(s);
      expect(",");
      expect_word("end");
      expect("=");
      const Token e = identifier("end node id");
      targets.push_back(e);
      expect(",");
      expect_word("iterations");
      expect("=");
      c.iterations = range();
      expect(",");
      expect_word("mode");
      expect("=");
      if (is_word("linked"))
        c.mode = ChainMode::LinkedChain;
      else if (is_word("shared"))
        c.mode = ChainMode::SharedNode;
      else
        fail("'linked' or 'shared'");
      advance();
      c.start = s.text;
      c.end = e.text;
      r.target = target.text;
      r.body = c;
    } else if (is_word("config")) {
      advance();
      const Token target = identifier("motif id");
      targets.push_back(target);
      expect(":");
      MotifConfigRule cfg;
      bool has_nodes = false;
      motif_params(cfg, has_nodes);
      if (!has_nodes) fail("'nodes' parameter");
      r.target = target.text;
      r.body = cfg;
    } else {
      fail("rule kind (attr, repeat, chain, config)");
    }
    auto label = rule_label();
    expect(";");
    const auto before = qr_.rules.size();
    add_rule(std::move(r), start, label);
    if (qr_.rules.size() == before) return;
    const std::string& rid = qr_.rules.back().id;
    for (const auto& t : targets) refs_.push_back(ref(t, rid));
    if (check) {
      check->rule_id = rid;
      attr_checks_.push_back(*check);
    }
  }

  void resolve() {
    for (const auto& r : refs_)
      if (!entity_spans_.count(r.id))
        error(r.span, "reference to undeclared id " + r.id, r.owner);
    for (const auto& c : attr_checks_) {
      const Entity* t = qr_.find_entity(c.target);
      if (!t) continue;
      const bool ok = (c.scope == AttrScope::Node && t->is_node()) ||
                      (c.scope == AttrScope::Edge && t->is_edge()) ||
                      ((c.scope == AttrScope::NodesIn || c.scope == AttrScope::EdgesIn) &&
                       (t->is_motif() || t->is_custom()));
      if (!ok) {
        static constexpr std::array<std::string_view, 4> kScope{"node", "edge", "nodes in",
                                                                "edges in"};
        error(c.span,
              "'attr " + std::string(kScope[static_cast<size_t>(c.scope)]) + "' cannot target " +
                  c.target,
              c.rule_id);
      }
    }
  }

  std::vector<Token> toks_;
  std::vector<Diagnostic>& diags_;
  size_t pos_ = 0;
  QueryRepresentation qr_;
  int decl_count_ = 0;
  std::vector<Reference> refs_;
  std::vector<AttrCheck> attr_checks_;
  std::unordered_map<std::string, SourceSpan> entity_spans_;
  std::unordered_map<std::string, SourceSpan> rule_spans_;
};

std::string format_range(const IntRange& r) {
  if (r.fixed()) return std::to_string(r.lo);
  return std::to_string(r.lo) + ".." + std::to_string(r.hi);
}

std::string format_config(const MotifConfigRule& c) {
  std::string s = "nodes=" + format_range(c.nodes);
  if (c.width) s += ", width=" + format_range(*c.width);
  if (c.depth) s += ", depth=" + format_range(*c.depth);
  return s;
}

std::string format_endpoint(const EndpointRef& e) {
  std::string s = format_identifier(e.entity);
  if (e.port == Port::Head) s += ".head";
  if (e.port == Port::Tail) s += ".tail";
  return s;
}

std::string label_suffix(const Rule& r, size_t index) {
  if (r.id == "r" + std::to_string(index)) return "";
  return " as " + format_identifier(r.id);
}

std::string format_entity(const Entity& e, const Rule* inline_cfg, size_t cfg_index) {
  const std::string id = format_identifier(e.id);
  return std::visit(
      [&](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, NodeEntity>) {
          return "node " + id + ";";
        } else if constexpr (std::is_same_v<T, EdgeEntity>) {
          return "edge " + id + " = " + format_endpoint(k.source) + (k.directed ? " -> " : " -- ") +
                 format_endpoint(k.target) + ";";
        } else if constexpr (std::is_same_v<T, MotifEntity>) {
          std::string s = "motif " + id + " = " + std::string(motif_name(k.kind));
          if (inline_cfg) {
            s += "(" + format_config(*inline_cfg->as<MotifConfigRule>()) + ")";
            s += label_suffix(*inline_cfg, cfg_index);
          }
          return s + ";";
        } else {
          std::string s = "group " + id + " = { ";
          for (size_t i = 0; i < k.members.size(); ++i)
            s += (i ? ", " : "") + format_identifier(k.members[i]);
          return s + " };";
        }
      },
      e.kind);
}

std::string format_rule(const Rule& r, const QueryRepresentation& qr, size_t index) {
  const std::string target = format_identifier(r.target);
  const Entity* t = qr.find_entity(r.target);
  std::string s = std::visit(
      [&](const auto& b) -> std::string {
        using T = std::decay_t<decltype(b)>;
        auto pred = [](const Predicate& p) {
          return format_identifier(p.attr) + " " + std::string(op_symbol(p.op)) + " " +
                 format_literal(p.literal);
        };
        if constexpr (std::is_same_v<T, NodeAttrRule>) {
          const bool single = t && t->is_node();
          return std::string("rule attr ") + (single ? "node " : "nodes in ") + target + " : " +
                 pred(b.predicate);
        } else if constexpr (std::is_same_v<T, EdgeAttrRule>) {
          const bool single = t && t->is_edge();
          return std::string("rule attr ") + (single ? "edge " : "edges in ") + target + " : " +
                 pred(b.predicate);
        } else if constexpr (std::is_same_v<T, MotifConfigRule>) {
          return "rule config " + target + " : " + format_config(b);
        } else if constexpr (std::is_same_v<T, RepeatingRule>) {
          return "rule repeat " + target + " : count = " + format_range(b.count);
        } else {
          return "rule chain " + target + " : start=" + format_identifier(b.start) +
                 ", end=" + format_identifier(b.end) + ", iterations=" +
                 format_range(b.iterations) +
                 ", mode=" + (b.mode == ChainMode::LinkedChain ? "linked" : "shared");
        }
      },
      r.body);
  return s + label_suffix(r, index) + ";";
}

}  // namespace

std::string format_identifier(std::string_view id) {
  bool bare = !id.empty() && is_ident_start(id.front()) && !is_keyword(id);
  for (char c : id) bare = bare && is_ident_char(c);
  if (bare) return std::string(id);
  std::string out = "`";
  for (char c : id) {
    if (c == '`') out.push_back('`');
    out.push_back(c);
  }
  return out + "`";
}

ParseResult parse(std::string_view text) {
  ParseResult result;
  Lexer lexer(text, result.diagnostics);
  auto tokens = lexer.run();
  Parser parser(std::move(tokens), result.diagnostics);
  QueryRepresentation qr = parser.run();
  if (has_errors(result.diagnostics)) return result;

  auto validation = validate(qr);
  for (auto& d : validation) {
    if (auto it = parser.rule_spans().find(d.subject); it != parser.rule_spans().end())
      d.span = it->second;
    else if (auto e = parser.entity_spans().find(d.subject); e != parser.entity_spans().end())
      d.span = e->second;
    else
      d.span = SourceSpan{1, 1, 0};
    result.diagnostics.push_back(std::move(d));
  }
  if (!has_errors(result.diagnostics)) result.query = std::move(qr);
  return result;
}

std::string serialize(const QueryRepresentation& qr) {
  std::string header = "query " + quote_string(qr.name);
  if (qr.directed) header += *qr.directed ? " directed" : " undirected";
  if (qr.entities.empty() && qr.rules.empty()) return header + " { }";

  // A motif configuration is written inline when that keeps both the entity
  // and the rule order intact; otherwise it becomes a `rule config` line.
  std::map<size_t, size_t> inline_cfg;  // rule index -> entity index
  std::map<size_t, size_t> cfg_of_entity;
  {
    long last = -1;
    for (size_t i = 0; i < qr.entities.size(); ++i) {
      if (!qr.entities[i].is_motif()) continue;
      for (size_t j = 0; j < qr.rules.size(); ++j) {
        if (qr.rules[j].target == qr.entities[i].id && qr.rules[j].as<MotifConfigRule>()) {
          if (static_cast<long>(j) > last) {
            inline_cfg[j] = i;
            cfg_of_entity[i] = j;
            last = static_cast<long>(j);
          }
          break;
        }
      }
    }
  }

  std::vector<std::string> lines;
  size_t next_entity = 0;
  auto emit_entities_through = [&](size_t last) {
    for (; next_entity <= last && next_entity < qr.entities.size(); ++next_entity) {
      auto it = cfg_of_entity.find(next_entity);
      const Rule* cfg = it == cfg_of_entity.end() ? nullptr : &qr.rules[it->second];
      lines.push_back(format_entity(qr.entities[next_entity], cfg,
                                    it == cfg_of_entity.end() ? 0 : it->second));
    }
  };
  for (size_t j = 0; j < qr.rules.size(); ++j) {
    if (auto it = inline_cfg.find(j); it != inline_cfg.end()) {
      emit_entities_through(it->second);
      continue;
    }
    // Entities ahead of the next inline configuration can be declared now.
    auto pending = inline_cfg.upper_bound(j);
    const size_t stop = pending == inline_cfg.end() ? qr.entities.size() : pending->second;
    if (stop > 0) emit_entities_through(stop - 1);
    lines.push_back(format_rule(qr.rules[j], qr, j));
  }
  if (!qr.entities.empty()) emit_entities_through(qr.entities.size() - 1);

  std::string out = header + " {\n";
  for (const auto& l : lines) out += "  " + l + "\n";
  return out + "}";
}

}  // namespace qlat
