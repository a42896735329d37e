#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "eqmorph/errors.hpp"
#include "eqmorph/lexer.hpp"
#include "eqmorph/sql.hpp"

namespace eqmorph {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  SqlQuery statement() {
    std::vector<SqlQuery> blocks;
    std::vector<SetOpKind> ops;
    blocks.push_back(block());
    while (peek().is_keyword("union")) {
      advance();
      SetOpKind kind = SetOpKind::Union;
      if (peek().is_keyword("all")) {
        advance();
        kind = SetOpKind::UnionAll;
      }
      ops.push_back(kind);
      blocks.push_back(block());
    }
    if (peek().is_symbol(";")) advance();
    if (peek().kind != Token::Kind::End) fail({"UNION", ";", "end of input"});
    // Fold right-to-left into the chain representation.
    SqlQuery result = std::move(blocks.back());
    for (std::size_t i = blocks.size() - 1; i-- > 0;) {
      SqlQuery head = std::move(blocks[i]);
      head.set_op = SetOperation{ops[i], Box<SqlQuery>(std::move(result))};
      result = std::move(head);
    }
    return result;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    throw SyntaxError(peek().position, std::move(expected), peek().describe());
  }

  void expect_keyword(std::string_view kw) {
    if (!peek().is_keyword(kw)) {
      std::string up(kw);
      for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      fail({up});
    }
    advance();
  }

  void expect_symbol(std::string_view s) {
    if (!peek().is_symbol(s)) fail({std::string(s)});
    advance();
  }

  std::string identifier(const char* what) {
    if (peek().kind != Token::Kind::Identifier) fail({what});
    return advance().text;
  }

  SqlQuery block() {
    SqlQuery q;
    expect_keyword("select");
    if (peek().is_keyword("distinct")) {
      advance();
      q.distinct = true;
    }
    q.select.push_back(select_item());
    while (peek().is_symbol(",")) {
      advance();
      q.select.push_back(select_item());
    }
    expect_keyword("from");
    q.from.push_back(identifier("table name"));
    while (peek().is_symbol(",")) {
      advance();
      q.from.push_back(identifier("table name"));
    }
    if (peek().is_keyword("where")) {
      advance();
      q.where = predicate();
    }
    if (peek().is_keyword("group")) {
      advance();
      expect_keyword("by");
      q.group_by.push_back(column_ref());
      while (peek().is_symbol(",")) {
        advance();
        q.group_by.push_back(column_ref());
      }
    }
    if (peek().is_keyword("having")) {
      if (q.group_by.empty()) fail({"GROUP BY before HAVING"});
      advance();
      q.having = predicate();
    }
    return q;
  }

  static std::optional<AggFn> agg_keyword(const Token& t) {
    if (t.kind != Token::Kind::Keyword) return std::nullopt;
    if (t.text == "count") return AggFn::Count;
    if (t.text == "sum") return AggFn::Sum;
    if (t.text == "min") return AggFn::Min;
    if (t.text == "max") return AggFn::Max;
    if (t.text == "avg") return AggFn::Avg;
    return std::nullopt;
  }

  SelectItem select_item() {
    if (auto fn = agg_keyword(peek())) {
      advance();
      expect_symbol("(");
      AggCall call{*fn, std::nullopt};
      if (peek().is_symbol("*")) {
        if (*fn != AggFn::Count) fail({"column"});
        advance();
      } else {
        call.arg = column_ref();
      }
      expect_symbol(")");
      return call;
    }
    if (peek().kind != Token::Kind::Identifier) fail({"column", "aggregate"});
    return column_ref();
  }

  ColumnRef column_ref() {
    std::string first = identifier("column");
    if (peek().is_symbol(".")) {
      advance();
      return ColumnRef{std::move(first), identifier("column")};
    }
    return ColumnRef{"", std::move(first)};
  }

  Predicate predicate() {
    Predicate left = conjunction();
    while (peek().is_keyword("or")) {
      advance();
      left = Predicate::disj(std::move(left), conjunction());
    }
    return left;
  }

  Predicate conjunction() {
    Predicate left = negation();
    while (peek().is_keyword("and")) {
      advance();
      left = Predicate::conj(std::move(left), negation());
    }
    return left;
  }

  Predicate negation() {
    if (peek().is_keyword("not")) {
      advance();
      return Predicate::negate(negation());
    }
    return primary();
  }

  static std::optional<CmpOp> cmp_op(const Token& t) {
    if (t.kind != Token::Kind::Symbol) return std::nullopt;
    if (t.text == "=") return CmpOp::Eq;
    if (t.text == "<>" || t.text == "!=") return CmpOp::Ne;
    if (t.text == "<") return CmpOp::Lt;
    if (t.text == "<=") return CmpOp::Le;
    if (t.text == ">") return CmpOp::Gt;
    if (t.text == ">=") return CmpOp::Ge;
    return std::nullopt;
  }

  Predicate primary() {
    const Token& t = peek();
    if (t.is_keyword("true")) {
      advance();
      return Predicate::truth(TruthValue::True);
    }
    if (t.is_keyword("false")) {
      advance();
      return Predicate::truth(TruthValue::False);
    }
    if (t.is_keyword("null") && !cmp_op(peek(1))) {
      advance();
      return Predicate::truth(TruthValue::Unknown);
    }
    if (t.is_symbol("(")) {
      advance();
      Predicate inner = predicate();
      expect_symbol(")");
      return inner;
    }
    Term lhs = term();
    auto op = cmp_op(peek());
    if (!op) fail({"comparison operator"});
    advance();
    Term rhs = term();
    return Predicate::compare(std::move(lhs), *op, std::move(rhs));
  }

  Term term() {
    const Token& t = peek();
    if (t.kind == Token::Kind::Identifier) return column_ref();
    if (t.is_keyword("null")) {
      advance();
      return Value::null();
    }
    if (t.kind == Token::Kind::String) return Value::string(advance().text);
    bool negative = false;
    if (t.is_symbol("-") && peek(1).kind == Token::Kind::Number) {
      advance();
      negative = true;
    }
    if (peek().kind == Token::Kind::Number) return number(advance(), negative);
    fail({"column", "constant"});
  }

  Value number(const Token& t, bool negative) {
    const std::string text = (negative ? "-" : "") + t.text;
    try {
      if (t.text.find('.') == std::string::npos) return Value::integer(std::stoll(text));
      return Value::decimal(Decimal::parse(text));
    } catch (const std::exception&) {
      throw SyntaxError(t.position, {"number in range"}, t.text);
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

void render_pred(const Predicate& p, std::string& out);

void render_operand(const Predicate& p, bool parens, std::string& out) {
  if (parens) out += '(';
  render_pred(p, out);
  if (parens) out += ')';
}

void render_pred(const Predicate& p, std::string& out) {
  using K = Predicate::Kind;
  switch (p.kind) {
    case K::Literal:
      out += p.literal == TruthValue::True ? "TRUE" : p.literal == TruthValue::False ? "FALSE" : "NULL";
      break;
    case K::Compare:
      out += render(p.lhs);
      out += ' ';
      out += to_string(p.op);
      out += ' ';
      out += render(p.rhs);
      break;
    case K::And:
      render_operand(p.operands[0], p.operands[0].kind == K::Or, out);
      out += " AND ";
      render_operand(p.operands[1], p.operands[1].kind == K::Or || p.operands[1].kind == K::And, out);
      break;
    case K::Or:
      render_operand(p.operands[0], false, out);
      out += " OR ";
      render_operand(p.operands[1], p.operands[1].kind == K::Or, out);
      break;
    case K::Not:
      out += "NOT ";
      render_operand(p.operands[0], p.operands[0].kind == K::And || p.operands[0].kind == K::Or, out);
      break;
  }
}

void render_block(const SqlQuery& q, std::string& out) {
  out += "SELECT ";
  if (q.distinct) out += "DISTINCT ";
  for (std::size_t i = 0; i < q.select.size(); ++i) {
    if (i) out += ", ";
    out += render(q.select[i]);
  }
  out += " FROM ";
  for (std::size_t i = 0; i < q.from.size(); ++i) {
    if (i) out += ", ";
    out += q.from[i];
  }
  if (q.where) {
    out += " WHERE ";
    render_pred(*q.where, out);
  }
  if (!q.group_by.empty()) {
    out += " GROUP BY ";
    for (std::size_t i = 0; i < q.group_by.size(); ++i) {
      if (i) out += ", ";
      out += q.group_by[i].to_string();
    }
  }
  if (q.having) {
    out += " HAVING ";
    render_pred(*q.having, out);
  }
}

}  // namespace

SqlQuery parse(std::string_view text) { return Parser(text).statement(); }

std::string render(const Term& t) {
  if (const auto* c = std::get_if<ColumnRef>(&t)) return c->to_string();
  return std::get<Value>(t).to_sql();
}

std::string render(const SelectItem& item) {
  if (const auto* c = std::get_if<ColumnRef>(&item)) return c->to_string();
  const auto& a = std::get<AggCall>(item);
  return std::string(to_string(a.fn)) + "(" + (a.arg ? a.arg->to_string() : std::string("*")) + ")";
}

std::string render(const Predicate& p) {
  std::string out;
  render_pred(p, out);
  return out;
}

std::string render(const SqlQuery& q) {
  std::string out;
  for (const SqlQuery* b = &q; b != nullptr;) {
    render_block(*b, out);
    if (!b->set_op) break;
    out += b->set_op->kind == SetOpKind::UnionAll ? " UNION ALL " : " UNION ";
    b = &*b->set_op->rhs;
  }
  return out;
}

}  // namespace eqmorph
