// SQL script and JSON fixture loading for the reference engine.

#include <algorithm>

#include <json.hpp>

#include "eqmorph/errors.hpp"
#include "eqmorph/lexer.hpp"
#include "eqmorph/refdb.hpp"

namespace eqmorph {

namespace {

class ScriptParser {
 public:
  ScriptParser(Database& db, std::string_view text) : db_(db), toks_(tokenize(text)) {}

  void run() {
    while (peek().kind != Token::Kind::End) {
      if (accept_symbol(";")) continue;
      if (accept_word("create")) {
        create();
      } else if (accept_word("insert")) {
        insert();
      } else if (accept_word("drop")) {
        drop();
      } else {
        fail("CREATE, INSERT or DROP");
      }
      if (peek().kind != Token::Kind::End) expect_symbol(";");
    }
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& expected) const {
    throw SyntaxError(peek().position, {expected}, peek().describe());
  }

  bool word_is(const Token& t, std::string_view w) const {
    return (t.kind == Token::Kind::Keyword || t.kind == Token::Kind::Identifier) && t.text == w;
  }
  bool accept_word(std::string_view w) {
    if (!word_is(peek(), w)) return false;
    advance();
    return true;
  }
  void expect_word(std::string_view w) {
    if (!accept_word(w)) fail(std::string(w));
  }
  bool accept_symbol(std::string_view s) {
    if (!peek().is_symbol(s)) return false;
    advance();
    return true;
  }
  void expect_symbol(std::string_view s) {
    if (!accept_symbol(s)) fail("'" + std::string(s) + "'");
  }
  std::string name() {
    if (peek().kind != Token::Kind::Identifier) fail("identifier");
    return advance().text;
  }

  void create() {
    expect_word("table");
    TableDef def;
    def.name = name();
    expect_symbol("(");
    do {
      ColumnDef col;
      col.name = name();
      const Token& type = advance();
      auto t = column_type_from_name(type.text);
      if (!t) throw ScriptError("unsupported column type " + type.text);
      col.type = *t;
      if (accept_symbol("(")) {  // length / precision are accepted and ignored
        do {
          if (peek().kind != Token::Kind::Number) fail("number");
          advance();
        } while (accept_symbol(","));
        expect_symbol(")");
      }
      def.columns.push_back(std::move(col));
    } while (accept_symbol(","));
    expect_symbol(")");
    try {
      db_.create_table(std::move(def));
    } catch (const std::invalid_argument& e) {
      throw ScriptError(e.what());
    }
  }

  void drop() {
    expect_word("table");
    const bool if_exists = accept_word("if") ? (expect_word("exists"), true) : false;
    const std::string table = name();
    if (db_.find(table) == nullptr) {
      if (if_exists) return;
      throw ScriptError("no such table " + table);
    }
    db_.drop_table(table);
  }

  Value literal() {
    if (accept_word("null")) return Value::null();
    if (peek().kind == Token::Kind::String) return Value::string(advance().text);
    const bool negative = accept_symbol("-");
    if (peek().kind != Token::Kind::Number) fail("literal");
    const std::string text = (negative ? "-" : "") + advance().text;
    try {
      if (text.find('.') == std::string::npos) return Value::integer(std::stoll(text));
      return Value::decimal(Decimal::parse(text));
    } catch (const std::out_of_range&) {
      throw ScriptError("numeric literal out of range: " + text);
    } catch (const ExecError& e) {
      throw ScriptError(e.what());
    }
  }

  void insert() {
    expect_word("into");
    const std::string table = name();
    const Table* t = db_.find(table);
    if (t == nullptr) throw ScriptError("no such table " + table);
    std::vector<std::size_t> order;
    if (accept_symbol("(")) {
      do {
        const std::string col = name();
        const auto& cols = t->def.columns;
        auto it = std::find_if(cols.begin(), cols.end(), [&](const ColumnDef& c) { return c.name == col; });
        if (it == cols.end()) throw ScriptError("no column " + col + " in " + table);
        order.push_back(static_cast<std::size_t>(it - cols.begin()));
      } while (accept_symbol(","));
      expect_symbol(")");
    } else {
      for (std::size_t i = 0; i < t->def.columns.size(); ++i) order.push_back(i);
    }
    const std::size_t width = t->def.columns.size();
    expect_word("values");
    do {
      expect_symbol("(");
      std::vector<Value> given;
      do {
        given.push_back(literal());
      } while (accept_symbol(","));
      expect_symbol(")");
      if (given.size() != order.size()) throw ScriptError("wrong number of values for " + table);
      Tuple tuple(width);
      for (std::size_t i = 0; i < order.size(); ++i) tuple[order[i]] = std::move(given[i]);
      try {
        db_.insert(table, std::move(tuple));
      } catch (const std::invalid_argument& e) {
        throw ScriptError(e.what());
      }
    } while (accept_symbol(","));
  }

  Database& db_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

std::string ddl_type(ColumnType t) {
  switch (t) {
    case ColumnType::Int: return "INT";
    case ColumnType::Dec: return "DECIMAL(18,4)";
    case ColumnType::Str: return "VARCHAR(32)";
  }
  return "INT";
}

}  // namespace

void apply_script(Database& db, std::string_view script) { ScriptParser(db, script).run(); }

Database load_script(std::string_view script) {
  Database db;
  apply_script(db, script);
  return db;
}

std::string schema_ddl(const Database& db) {
  std::string out;
  for (const auto& t : db.tables()) {
    out += "CREATE TABLE " + t.def.name + " (";
    for (std::size_t i = 0; i < t.def.columns.size(); ++i) {
      if (i) out += ", ";
      out += t.def.columns[i].name + " " + ddl_type(t.def.columns[i].type);
    }
    out += ");\n";
  }
  return out;
}

std::vector<std::string> insert_statements(const Database& db) {
  std::vector<std::string> out;
  for (const auto& t : db.tables()) {
    for (const auto& r : t.data.rows()) {
      std::string stmt = "INSERT INTO " + t.def.name + " VALUES (";
      for (std::size_t i = 0; i < r.tuple.size(); ++i) {
        if (i) stmt += ", ";
        stmt += r.tuple[i].to_sql();
      }
      stmt += ");";
      for (std::uint64_t k = 0; k < r.count; ++k) out.push_back(stmt);
    }
  }
  return out;
}

std::string dump_script(const Database& db) {
  std::string out = schema_ddl(db);
  for (const auto& s : insert_statements(db)) out += s + "\n";
  return out;
}

Database load_json_fixture(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ScriptError(std::string("bad fixture: ") + e.what());
  }
  Database db;
  try {
    for (const auto& jt : doc.at("tables")) {
      TableDef def;
      def.name = jt.at("name").get<std::string>();
      for (const auto& jc : jt.at("columns")) {
        auto type = column_type_from_name(jc.at("type").get<std::string>());
        if (!type) throw ScriptError("unsupported column type " + jc.at("type").dump());
        def.columns.push_back(ColumnDef{jc.at("name").get<std::string>(), *type});
      }
      const std::string name = def.name;
      const TableDef copy = def;
      db.create_table(std::move(def));
      if (!jt.contains("rows")) continue;
      for (const auto& jr : jt.at("rows")) {
        if (!jr.is_array() || jr.size() != copy.columns.size()) throw ScriptError("bad row in " + name);
        Tuple tuple;
        for (std::size_t i = 0; i < jr.size(); ++i) {
          const json& v = jr[i];
          if (v.is_null()) {
            tuple.push_back(Value::null());
          } else if (copy.columns[i].type == ColumnType::Str) {
            tuple.push_back(Value::string(v.get<std::string>()));
          } else if (v.is_number_integer()) {
            tuple.push_back(Value::integer(v.get<std::int64_t>()));
          } else if (copy.columns[i].type == ColumnType::Dec) {
            tuple.push_back(Value::decimal(Decimal::parse(v.is_string() ? v.get<std::string>() : v.dump())));
          } else {
            throw ScriptError("bad value " + v.dump() + " in " + name);
          }
        }
        db.insert(name, std::move(tuple));
      }
    }
  } catch (const json::exception& e) {
    throw ScriptError(std::string("bad fixture: ") + e.what());
  } catch (const ScriptError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ScriptError(e.what());
  }
  return db;
}

std::string to_json_fixture(const Database& db) {
  using nlohmann::json;
  json tables = json::array();
  for (const auto& t : db.tables()) {
    json cols = json::array();
    for (const auto& c : t.def.columns) cols.push_back({{"name", c.name}, {"type", std::string(to_string(c.type))}});
    json rows = json::array();
    for (const auto& r : t.data.rows()) {
      json row = json::array();
      for (const auto& v : r.tuple) {
        if (v.is_null()) {
          row.push_back(nullptr);
        } else if (v.is_int()) {
          row.push_back(v.as_int());
        } else {
          row.push_back(v.to_string());  // decimals as strings stay exact
        }
      }
      for (std::uint64_t k = 0; k < r.count; ++k) rows.push_back(row);
    }
    tables.push_back({{"name", t.def.name}, {"columns", cols}, {"rows", rows}});
  }
  return json{{"tables", tables}}.dump(2);
}

}  // namespace eqmorph
