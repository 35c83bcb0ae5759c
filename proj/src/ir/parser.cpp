#include <cctype>
#include <map>
#include <set>

#include "scaf/ir/text.hpp"

namespace scaf::ir {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string &message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line), column_(column), detail_(message) {}

namespace {

struct Token {
  enum class Kind { Ident, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  std::size_t column = 0;
};

std::vector<Token> tokenize(std::string_view line, std::size_t line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == '#')
      break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i;
      while (i < line.size() &&
             (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_'))
        ++i;
      out.push_back({Token::Kind::Ident, std::string(line.substr(start, i - start)), start + 1});
      continue;
    }
    if (line.substr(i, 3) == "<<<" || line.substr(i, 3) == ">>>") {
      out.push_back({Token::Kind::Punct, std::string(line.substr(i, 3)), i + 1});
      i += 3;
      continue;
    }
    static const std::string_view kPunct = "=,(){}:@";
    if (kPunct.find(c) != std::string_view::npos) {
      out.push_back({Token::Kind::Punct, std::string(1, c), i + 1});
      ++i;
      continue;
    }
    throw ParseError(line_no, i + 1, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Token::Kind::End, "", line.size() + 1});
  return out;
}

class LineCursor {
public:
  LineCursor(std::vector<Token> tokens, std::size_t line_no)
      : tokens_(std::move(tokens)), line_(line_no) {}

  const Token &peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  bool is(std::string_view text, std::size_t ahead = 0) const {
    const Token &t = peek(ahead);
    return t.kind != Token::Kind::End && t.text == text;
  }
  Token next() {
    Token t = peek();
    if (pos_ < tokens_.size() - 1)
      ++pos_;
    return t;
  }
  Token expect(std::string_view text) {
    if (!is(text))
      fail("expected '" + std::string(text) + "'");
    return next();
  }
  Token ident(const std::string &what) {
    if (peek().kind != Token::Kind::Ident)
      fail("expected " + what);
    return next();
  }
  void finish() {
    if (!at_end())
      fail("unexpected '" + peek().text + "'");
  }
  [[noreturn]] void fail(const std::string &message) const {
    const Token &t = peek();
    std::string got = t.kind == Token::Kind::End ? "end of line" : "'" + t.text + "'";
    throw ParseError(line_, t.column, message + ", got " + got);
  }
  std::size_t line() const { return line_; }

private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

struct Use {
  std::string name;
  std::size_t line;
  std::size_t column;
};

struct DefInfo {
  bool annotated = false;
};

class FunctionParser {
public:
  explicit FunctionParser(Function &fn) : fn_(fn) {}

  void add_param(LineCursor &cur) {
    Token name = cur.ident("parameter name");
    ValueType type = ValueType::Pointer;
    if (cur.is(":")) {
      cur.next();
      type = parse_type(cur);
    }
    declare(name, cur.line());
    fn_.params.push_back({name.text, type});
  }

  void statement(LineCursor &cur) {
    Statement stmt;
    stmt.site = {fn_.name, static_cast<std::uint32_t>(fn_.body.size() + 1)};
    if (cur.is("store")) {
      cur.next();
      Store s;
      s.address = operand(cur);
      cur.expect(",");
      s.payload = operand(cur);
      stmt.op = std::move(s);
    } else if (cur.is("ret")) {
      cur.next();
      Return r;
      if (!cur.at_end())
        r.value = operand(cur);
      stmt.op = std::move(r);
    } else if (cur.is("call") || cur.is("icall")) {
      stmt.op = call(cur, std::nullopt);
    } else {
      Token name = cur.ident("statement");
      Def def{name.text, ValueType::Pointer};
      bool annotated = false;
      if (cur.is(":")) {
        cur.next();
        def.type = parse_type(cur);
        annotated = true;
      }
      cur.expect("=");
      declare(name, cur.line());
      if (annotated)
        annotated_.insert(def.name);
      stmt.op = rhs(cur, def);
    }
    cur.finish();
    fn_.body.push_back(std::move(stmt));
  }

  /// Runs the checks that need the whole body.
  void finish() {
    for (const Use &use : uses_)
      if (!defined_.contains(use.name))
        throw ParseError(use.line, use.column, "undefined value '" + use.name + "'");
    infer_types();
  }

private:
  static ValueType parse_type(LineCursor &cur) {
    Token t = cur.ident("type");
    if (t.text == "ptr")
      return ValueType::Pointer;
    if (t.text == "scalar")
      return ValueType::Scalar;
    throw ParseError(cur.line(), t.column, "unknown type '" + t.text + "'");
  }

  void declare(const Token &name, std::size_t line) {
    if (name.text == "null")
      throw ParseError(line, name.column, "'null' cannot be defined");
    if (!defined_.insert(name.text).second)
      throw ParseError(line, name.column, "duplicate definition of '" + name.text + "'");
  }

  Operand operand(LineCursor &cur) {
    if (cur.is("@")) {
      cur.next();
      return Operand::function(cur.ident("function name").text);
    }
    Token t = cur.ident("operand");
    if (t.text == "null")
      return Operand::null();
    uses_.push_back({t.text, cur.line(), t.column});
    return Operand::value(t.text);
  }

  Call call(LineCursor &cur, std::optional<Def> receiver) {
    Call c;
    c.receiver = std::move(receiver);
    if (cur.next().text == "icall") {
      c.callee_value = operand(cur);
    } else {
      c.callee = cur.ident("callee name").text;
    }
    cur.expect("(");
    if (!cur.is(")")) {
      c.args.push_back(operand(cur));
      while (cur.is(",")) {
        cur.next();
        c.args.push_back(operand(cur));
      }
    }
    cur.expect(")");
    return c;
  }

  decltype(Statement::op) rhs(LineCursor &cur, Def def) {
    Token kw = cur.peek();
    if (kw.kind != Token::Kind::Ident)
      cur.fail("expected statement kind");
    if (kw.text == "call" || kw.text == "icall")
      return call(cur, def);
    cur.next();
    if (kw.text == "copy")
      return Copy{def, operand(cur)};
    if (kw.text == "phi") {
      Phi phi{def, {}};
      phi.incoming.push_back(operand(cur));
      while (cur.is(",")) {
        cur.next();
        phi.incoming.push_back(operand(cur));
      }
      return phi;
    }
    if (kw.text == "null")
      return NullAssign{def};
    if (kw.text == "addr")
      return Addr{def};
    if (kw.text == "load")
      return Load{def, operand(cur)};
    if (kw.text == "field") {
      Field f{def, operand(cur), {}};
      cur.expect(",");
      f.field = cur.ident("field name").text;
      return f;
    }
    throw ParseError(cur.line(), kw.column, "unknown statement kind '" + kw.text + "'");
  }

  // Copy and phi results inherit the type of their operands unless annotated.
  void infer_types() {
    std::map<std::string, ValueType> types;
    for (const auto &p : fn_.params)
      types[p.name] = p.type;
    for (const auto &stmt : fn_.body)
      if (const Def *d = stmt.defined())
        types[d->name] = d->type;
    auto operand_type = [&](const Operand &o) {
      return o.is_value() ? types.at(o.name) : ValueType::Pointer;
    };
    for (bool changed = true; changed;) {
      changed = false;
      for (auto &stmt : fn_.body) {
        Def *def = nullptr;
        ValueType inferred = ValueType::Pointer;
        if (auto *c = stmt.as<Copy>()) {
          def = &c->result;
          inferred = operand_type(c->source);
        } else if (auto *p = stmt.as<Phi>()) {
          def = &p->result;
          inferred = operand_type(p->incoming.front());
        }
        if (!def || annotated_.contains(def->name) || def->type == inferred)
          continue;
        def->type = inferred;
        types[def->name] = inferred;
        changed = true;
      }
    }
  }

  Function &fn_;
  std::set<std::string> defined_;
  std::set<std::string> annotated_;
  std::vector<Use> uses_;
};

ExternalClass parse_extern_kind(const Token &t, std::size_t line) {
  static const std::map<std::string, ExternalClass> kinds = {
      {"pure", ExternalClass::ExternalPure},
      {"sideeffect", ExternalClass::ExternalSideEffecting},
      {"dealloc", ExternalClass::ExternalDeallocator},
      {"alloc_seed", ExternalClass::ExternalAllocatorSeed},
  };
  auto it = kinds.find(t.text);
  if (it == kinds.end())
    throw ParseError(line, t.column, "unknown extern kind '" + t.text + "'");
  return it->second;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

} // namespace

Program parse_program(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::size_t start = 0; start <= text.size();) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }

  Program program;
  std::size_t entry_line = 0;
  std::size_t entry_column = 0;

  auto add_function = [&](Function fn, std::size_t line, std::size_t column) {
    std::string name = fn.name;
    if (!program.functions.emplace(name, std::move(fn)).second)
      throw ParseError(line, column, "duplicate function '" + name + "'");
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    LineCursor cur(tokenize(lines[i], line_no), line_no);
    if (cur.at_end())
      continue;
    Token head = cur.ident("declaration");
    if (head.text == "entry") {
      if (program.entry)
        throw ParseError(line_no, head.column, "duplicate entry declaration");
      Token name = cur.ident("function name");
      program.entry = name.text;
      entry_line = line_no;
      entry_column = name.column;
      cur.finish();
    } else if (head.text == "extern") {
      Token name = cur.ident("function name");
      Token key = cur.ident("'kind'");
      if (key.text != "kind")
        throw ParseError(line_no, key.column, "expected 'kind'");
      cur.expect("=");
      Function fn;
      fn.name = name.text;
      fn.external_class = parse_extern_kind(cur.ident("extern kind"), line_no);
      cur.finish();
      add_function(std::move(fn), line_no, name.column);
    } else if (head.text == "func") {
      Token name = cur.ident("function name");
      Function fn;
      fn.name = name.text;
      FunctionParser body(fn);
      cur.expect("(");
      if (!cur.is(")")) {
        body.add_param(cur);
        while (cur.is(",")) {
          cur.next();
          body.add_param(cur);
        }
      }
      cur.expect(")");
      cur.expect("{");
      cur.finish();

      bool closed = false;
      while (!closed) {
        if (++i >= lines.size())
          throw ParseError(line_no, head.column, "unterminated function '" + fn.name + "'");
        const std::size_t body_line = i + 1;
        LineCursor stmt(tokenize(lines[i], body_line), body_line);
        if (stmt.at_end())
          continue;
        if (stmt.is("}")) {
          stmt.next();
          stmt.finish();
          closed = true;
        } else if (stmt.is("source") && stmt.is("<<<", 1)) {
          if (fn.source_text)
            stmt.fail("duplicate source block");
          stmt.next();
          stmt.next();
          stmt.finish();
          std::string source;
          bool first = true;
          for (;;) {
            if (++i >= lines.size())
              throw ParseError(body_line, 1, "unterminated source block");
            if (trim(lines[i]) == ">>>")
              break;
            if (!first)
              source += '\n';
            source += lines[i];
            first = false;
          }
          fn.source_text = std::move(source);
        } else {
          body.statement(stmt);
        }
      }
      body.finish();
      add_function(std::move(fn), line_no, name.column);
    } else {
      throw ParseError(line_no, head.column, "unknown declaration '" + head.text + "'");
    }
  }

  if (program.entry && !program.find(*program.entry))
    throw ParseError(entry_line, entry_column, "entry function '" + *program.entry + "' not found");
  return program;
}

} // namespace scaf::ir
