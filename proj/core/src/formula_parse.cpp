#include "prefcon/error.hpp"
#include "prefcon/formula.hpp"

#include <cctype>
#include <memory>

namespace prefcon {
namespace {

enum class RawCmp { eq, ne, lt, gt, le, ge };

struct Token {
  enum class Kind { ident, number, string, cmp, lparen, rparen, dot, end } kind;
  std::string text;
  std::size_t pos;
};

[[noreturn]] void syntax_error(std::size_t pos, const std::string& what) {
  throw Error(Errc::syntax_error, "syntax error at position " + std::to_string(pos) + ": " + what,
              {{"position", pos}});
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_digit = [&](std::size_t k) { return k < s.size() && std::isdigit(static_cast<unsigned char>(s[k])); };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Token::Kind::ident, std::string(s.substr(start, i - start)), start});
    } else if (is_digit(i) || ((c == '-' || c == '+') && is_digit(i + 1))) {
      ++i;
      while (is_digit(i)) ++i;
      if (i < s.size() && (s[i] == '.' || s[i] == '/') && is_digit(i + 1)) {
        ++i;
        while (is_digit(i)) ++i;
      }
      out.push_back({Token::Kind::number, std::string(s.substr(start, i - start)), start});
    } else if (c == '"' || c == '\'') {
      std::string text;
      ++i;
      bool closed = false;
      while (i < s.size()) {
        if (s[i] == '\\' && i + 1 < s.size()) {
          text += s[i + 1];
          i += 2;
        } else if (s[i] == c) {
          ++i;
          closed = true;
          break;
        } else {
          text += s[i++];
        }
      }
      if (!closed) syntax_error(start, "unterminated string literal");
      out.push_back({Token::Kind::string, std::move(text), start});
    } else if (c == '(') {
      out.push_back({Token::Kind::lparen, "(", i++});
    } else if (c == ')') {
      out.push_back({Token::Kind::rparen, ")", i++});
    } else if (c == '.') {
      out.push_back({Token::Kind::dot, ".", i++});
    } else if (c == '=' || c == '<' || c == '>' || c == '!') {
      std::string op(1, c);
      ++i;
      if (i < s.size() && s[i] == '=') op += s[i++];
      if (op == "!") syntax_error(start, "expected '!='");
      out.push_back({Token::Kind::cmp, op, start});
    } else {
      syntax_error(start, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Token::Kind::end, "", s.size()});
  return out;
}

bool keyword(const Token& t, std::string_view kw) {
  if (t.kind != Token::Kind::ident || t.text.size() != kw.size()) return false;
  for (std::size_t i = 0; i < kw.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(t.text[i])) != kw[i]) return false;
  return true;
}

struct Node {
  enum class Kind { conj, disj, neg, atom, truth, falsity } kind;
  std::vector<std::unique_ptr<Node>> kids;
  std::size_t attr = 0;
  int lhs = 0;
  RawCmp cmp = RawCmp::eq;
  int rhs = -1;
  Literal lit;
};

std::unique_ptr<Node> make_node(Node::Kind kind) {
  auto n = std::make_unique<Node>();
  n->kind = kind;
  return n;
}

class Parser {
public:
  Parser(std::string_view text, const Schema& schema) : toks_(lex(text)), schema_(schema) {}

  std::unique_ptr<Node> run() {
    auto n = formula();
    if (peek().kind != Token::Kind::end) syntax_error(peek().pos, "unexpected '" + peek().text + "'");
    return n;
  }

private:
  const Token& peek() const { return toks_[i_]; }
  const Token& next() { return toks_[i_++]; }

  std::unique_ptr<Node> formula() {
    auto first = and_expr();
    if (!keyword(peek(), "or")) return first;
    auto n = make_node(Node::Kind::disj);
    n->kids.push_back(std::move(first));
    while (keyword(peek(), "or")) {
      next();
      n->kids.push_back(and_expr());
    }
    return n;
  }

  std::unique_ptr<Node> and_expr() {
    auto first = unary();
    if (!keyword(peek(), "and")) return first;
    auto n = make_node(Node::Kind::conj);
    n->kids.push_back(std::move(first));
    while (keyword(peek(), "and")) {
      next();
      n->kids.push_back(unary());
    }
    return n;
  }

  std::unique_ptr<Node> unary() {
    const Token& t = peek();
    if (keyword(t, "not")) {
      next();
      auto n = make_node(Node::Kind::neg);
      n->kids.push_back(unary());
      return n;
    }
    if (t.kind == Token::Kind::lparen) {
      next();
      auto n = formula();
      if (peek().kind != Token::Kind::rparen) syntax_error(peek().pos, "expected ')'");
      next();
      return n;
    }
    if (keyword(t, "true")) {
      next();
      return make_node(Node::Kind::truth);
    }
    if (keyword(t, "false")) {
      next();
      return make_node(Node::Kind::falsity);
    }
    return atom();
  }

  // ref := ("L" | "R") "." ident
  std::pair<int, std::size_t> ref() {
    const Token& side = next();
    if (side.kind != Token::Kind::ident || (side.text != "L" && side.text != "R"))
      syntax_error(side.pos, "expected L or R");
    if (next().kind != Token::Kind::dot) syntax_error(toks_[i_ - 1].pos, "expected '.'");
    const Token& name = next();
    if (name.kind != Token::Kind::ident) syntax_error(name.pos, "expected attribute name");
    auto attr = schema_.find(name.text);
    if (!attr)
      throw Error(Errc::type_error, "unknown attribute '" + name.text + "'", {{"position", name.pos}});
    return {side.text == "L" ? 0 : 1, *attr};
  }

  std::unique_ptr<Node> atom() {
    const std::size_t at = peek().pos;
    auto [lhs, attr] = ref();
    const Token& op = next();
    if (op.kind != Token::Kind::cmp) syntax_error(op.pos, "expected comparison operator");
    RawCmp cmp = op.text == "=" || op.text == "==" ? RawCmp::eq
                 : op.text == "!=" ? RawCmp::ne
                 : op.text == "<"  ? RawCmp::lt
                 : op.text == ">"  ? RawCmp::gt
                 : op.text == "<=" ? RawCmp::le
                                   : RawCmp::ge;
    const Attribute& a = schema_.at(attr);
    if (a.domain == Domain::C && cmp != RawCmp::eq && cmp != RawCmp::ne)
      throw Error(Errc::type_error, "order comparison on C attribute '" + a.name + "'",
                  {{"position", op.pos}});
    auto n = make_node(Node::Kind::atom);
    n->attr = attr;
    n->lhs = lhs;
    n->cmp = cmp;
    const Token& rhs = peek();
    if (rhs.kind == Token::Kind::ident) {
      auto [rv, rattr] = ref();
      if (rattr != attr)
        throw Error(Errc::type_error,
                    "cross-attribute comparison of '" + a.name + "' and '" + schema_.at(rattr).name + "'",
                    {{"position", at}});
      n->rhs = rv;
    } else if (rhs.kind == Token::Kind::number) {
      next();
      if (a.domain != Domain::Q)
        throw Error(Errc::type_error, "numeric literal compared with C attribute '" + a.name + "'",
                    {{"position", rhs.pos}});
      auto q = parse_rational(rhs.text);
      if (!q) syntax_error(rhs.pos, "malformed number '" + rhs.text + "'");
      n->lit = Literal(*q);
    } else if (rhs.kind == Token::Kind::string) {
      next();
      if (a.domain != Domain::C)
        throw Error(Errc::type_error, "string literal compared with Q attribute '" + a.name + "'",
                    {{"position", rhs.pos}});
      n->lit = Literal(rhs.text);
    } else {
      syntax_error(rhs.pos, "expected attribute reference or literal");
    }
    return n;
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  const Schema& schema_;
};

std::vector<Cmp> expand(RawCmp c, bool negated) {
  switch (c) {
    case RawCmp::eq: return {negated ? Cmp::ne : Cmp::eq};
    case RawCmp::ne: return {negated ? Cmp::eq : Cmp::ne};
    case RawCmp::lt: return negated ? std::vector{Cmp::gt, Cmp::eq} : std::vector{Cmp::lt};
    case RawCmp::gt: return negated ? std::vector{Cmp::lt, Cmp::eq} : std::vector{Cmp::gt};
    case RawCmp::le: return negated ? std::vector{Cmp::gt} : std::vector{Cmp::lt, Cmp::eq};
    case RawCmp::ge: return negated ? std::vector{Cmp::lt} : std::vector{Cmp::gt, Cmp::eq};
  }
  return {};
}

DnfFormula to_dnf(const Node& n, bool negated, const SchemaPtr& schema) {
  switch (n.kind) {
    case Node::Kind::truth:
      return negated ? DnfFormula::falsum(schema) : DnfFormula::truth(schema);
    case Node::Kind::falsity:
      return negated ? DnfFormula::truth(schema) : DnfFormula::falsum(schema);
    case Node::Kind::neg:
      return to_dnf(*n.kids.front(), !negated, schema);
    case Node::Kind::atom: {
      std::vector<Conjunct> ds;
      for (Cmp c : expand(n.cmp, negated)) ds.push_back({Atom{n.attr, n.lhs, c, n.rhs, n.lit}});
      return DnfFormula(schema, std::move(ds));
    }
    case Node::Kind::conj:
    case Node::Kind::disj: {
      const bool conjunctive = (n.kind == Node::Kind::conj) != negated;
      DnfFormula acc = to_dnf(*n.kids.front(), negated, schema);
      for (std::size_t i = 1; i < n.kids.size(); ++i) {
        DnfFormula k = to_dnf(*n.kids[i], negated, schema);
        acc = conjunctive ? (acc && k) : (acc || k);
      }
      return acc;
    }
  }
  return DnfFormula::falsum(schema);
}

std::string var_name(int v) {
  if (v == 0) return "L";
  if (v == 1) return "R";
  return "V" + std::to_string(v);
}

std::string cmp_text(Cmp c) {
  switch (c) {
    case Cmp::eq: return "=";
    case Cmp::ne: return "!=";
    case Cmp::lt: return "<";
    case Cmp::gt: return ">";
  }
  return "?";
}

}  // namespace

DnfFormula parse_formula(std::string_view text, SchemaPtr schema) {
  Parser p(text, *schema);
  auto tree = p.run();
  return to_dnf(*tree, false, schema);
}

std::string to_string(const DnfFormula& f) {
  if (f.is_false()) return "false";
  if (f.is_true()) return "true";
  const Schema& s = f.schema();
  std::string out;
  const bool many = f.disjuncts().size() > 1;
  for (std::size_t i = 0; i < f.disjuncts().size(); ++i) {
    const Conjunct& c = f.disjuncts()[i];
    if (i) out += " or ";
    const bool wrap = many && c.size() > 1;
    if (wrap) out += "(";
    for (std::size_t j = 0; j < c.size(); ++j) {
      const Atom& a = c[j];
      if (j) out += " and ";
      const std::string& name = s.at(a.attr).name;
      out += var_name(a.lhs) + "." + name + " " + cmp_text(a.cmp) + " ";
      out += a.has_literal() ? to_string(a.lit) : var_name(a.rhs) + "." + name;
    }
    if (wrap) out += ")";
  }
  return out;
}

}  // namespace prefcon
