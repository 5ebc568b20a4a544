#include <cctype>
#include <cstdint>
#include <optional>
#include <unordered_set>

#include "manydsl/error.hpp"
#include "manydsl/syntax.hpp"

namespace manydsl {

namespace {

SourcePos position_of(std::string_view text, std::size_t offset) {
  SourcePos pos{offset, 1, 1};
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++pos.line;
      pos.column = 1;
    } else {
      ++pos.column;
    }
  }
  return pos;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Reads a double-quoted literal starting at text[i] == '"'. Returns the decoded
// contents and advances i past the closing quote.
std::optional<std::string> read_quoted(std::string_view text, std::size_t& i) {
  std::string out;
  ++i;
  while (i < text.size() && text[i] != '"') {
    char c = text[i++];
    if (c == '\\' && i < text.size()) {
      char e = text[i++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: out += e; break;
      }
    } else {
      out += c;
    }
  }
  if (i >= text.size()) return std::nullopt;
  ++i;
  return out;
}

// ---------------------------------------------------------------------------
// core tokens

struct Token {
  enum class Kind { Ident, Int, Str, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  std::int64_t value = 0;
  std::size_t offset = 0;
  std::size_t end = 0;
};

class CoreLexer {
 public:
  CoreLexer(std::string_view text, std::size_t offset) : text_(text), pos_(offset) {}

  const Token& peek(std::size_t k = 0) {
    while (buffer_.size() <= k) buffer_.push_back(scan());
    return buffer_[k];
  }

  Token next() {
    peek();
    Token t = buffer_.front();
    buffer_.erase(buffer_.begin());
    last_end_ = t.end;
    return t;
  }

  [[nodiscard]] std::size_t last_end() const { return last_end_; }
  [[nodiscard]] std::string_view text() const { return text_; }

 private:
  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      // Apostrophes only decorate stage names: 'ft', '[y]', '@e:'.
      if (std::isspace(static_cast<unsigned char>(c)) || c == '\'') {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Token scan() {
    skip_trivia();
    Token t;
    t.offset = pos_;
    if (pos_ >= text_.size()) {
      t.kind = Token::Kind::End;
      t.end = pos_;
      return t;
    }
    char c = text_[pos_];
    bool negative = c == '-' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]));
    if (std::isdigit(static_cast<unsigned char>(c)) || negative) {
      std::size_t start = pos_;
      if (negative) ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      t.kind = Token::Kind::Int;
      t.text = std::string(text_.substr(start, pos_ - start));
      try {
        t.value = std::stoll(t.text);
      } catch (const std::out_of_range&) {
        fail(ErrorKind::Syntax, "integer literal out of range: " + t.text, position_of(text_, start));
      }
    } else if (ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
      t.kind = Token::Kind::Ident;
      t.text = std::string(text_.substr(start, pos_ - start));
    } else if (c == '"') {
      std::size_t i = pos_;
      auto s = read_quoted(text_, i);
      if (!s) fail(ErrorKind::Syntax, "unterminated string", position_of(text_, pos_));
      pos_ = i;
      t.kind = Token::Kind::Str;
      t.text = *s;
    } else if (std::string_view("(){}[],@:&|!;").find(c) != std::string_view::npos) {
      ++pos_;
      t.kind = Token::Kind::Punct;
      t.text = std::string(1, c);
    } else {
      fail(ErrorKind::Syntax, std::string("unexpected character '") + c + "'", position_of(text_, pos_));
    }
    t.end = pos_;
    return t;
  }

  std::string_view text_;
  std::size_t pos_;
  std::size_t last_end_ = 0;
  std::vector<Token> buffer_;
};

// ---------------------------------------------------------------------------
// core parser

class CoreParser {
 public:
  CoreParser(std::string_view text, std::size_t offset, NameSupply& names)
      : lex_(text, offset), names_(names) {}

  TermPtr term() { return parse_term(); }

  void expect_end() {
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::End) error("unexpected trailing input '" + t.text + "'", t);
  }

  std::size_t consumed_end() const { return lex_.last_end(); }

  LambdaRead lambda_body(const std::vector<std::string>& params, std::string_view stage) {
    std::vector<Param> ps;
    std::size_t mark = scope_.size();
    for (const auto& p : params) {
      ps.push_back(Param{bind(p), false});
    }
    std::string stage_name = bind(stage);
    BodyPtr body = parse_body(stage_name);
    const Token& t = lex_.peek();
    if (!is_punct(t, '}')) error("expected '}' after action body", t);
    scope_.resize(mark);
    return LambdaRead{mk::lambda(std::move(ps), std::move(stage_name), std::move(body)), t.offset};
  }

 private:
  [[noreturn]] void error(const std::string& message, const Token& at, ErrorKind kind = ErrorKind::Syntax) {
    fail(kind, message, position_of(lex_.text(), at.offset));
  }

  static bool is_punct(const Token& t, char c) { return t.kind == Token::Kind::Punct && t.text[0] == c; }
  static bool is_ident(const Token& t, std::string_view s) { return t.kind == Token::Kind::Ident && t.text == s; }

  bool at_terminator() {
    const Token& t = lex_.peek();
    return t.kind == Token::Kind::End || is_punct(t, '}');
  }

  Token expect_punct(char c) {
    Token t = lex_.next();
    if (!is_punct(t, c)) error(std::string("expected '") + c + "'", t);
    return t;
  }

  Token expect_ident() {
    Token t = lex_.next();
    if (t.kind != Token::Kind::Ident) error("expected a name", t);
    return t;
  }

  std::string bind(std::string_view source) {
    std::string internal = names_.fresh(source);
    scope_.emplace_back(std::string(source), internal);
    return internal;
  }

  std::optional<std::string> lookup(std::string_view source) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      if (it->first == source) return it->second;
    }
    return std::nullopt;
  }

  TermPtr resolve(const Token& t) {
    if (auto internal = lookup(t.text)) return mk::var(*internal);
    if (is_builtin_name(t.text)) return mk::builtin(t.text);
    error("unbound name '" + t.text + "'", t, ErrorKind::UnboundName);
  }

  // stage expressions ------------------------------------------------------

  StageExprPtr parse_stage_or() {
    auto lhs = parse_stage_and();
    while (is_punct(lex_.peek(), '|')) {
      lex_.next();
      lhs = StageExpr::disj(lhs, parse_stage_and());
    }
    return lhs;
  }

  StageExprPtr parse_stage_and() {
    auto lhs = parse_stage_not();
    while (is_punct(lex_.peek(), '&')) {
      lex_.next();
      lhs = StageExpr::conj(lhs, parse_stage_not());
    }
    return lhs;
  }

  StageExprPtr parse_stage_not() {
    Token t = lex_.next();
    if (is_punct(t, '!')) return StageExpr::negate(parse_stage_not());
    if (is_punct(t, '(')) {
      auto e = parse_stage_or();
      expect_punct(')');
      return e;
    }
    if (t.kind != Token::Kind::Ident) error("expected a stage expression", t);
    if (t.text == "always") return StageExpr::constant(Stage::Top);
    if (t.text == "never") return StageExpr::constant(Stage::Bottom);
    if (auto internal = lookup(t.text)) return StageExpr::ref(*internal);
    error("unbound stage name '" + t.text + "'", t, ErrorKind::UnboundStageName);
  }

  // lambdas ----------------------------------------------------------------

  struct LambdaHead {
    std::vector<Param> params;
    std::string stage;
    std::size_t scope_mark = 0;
  };

  LambdaHead parse_lambda_head() {
    Token open = expect_punct('(');
    LambdaHead head;
    head.scope_mark = scope_.size();
    std::vector<std::pair<std::string, bool>> sources;
    while (!is_punct(lex_.peek(), ')')) {
      bool packed = false;
      if (is_punct(lex_.peek(), '!')) {
        lex_.next();
        packed = true;
      }
      Token name = expect_ident();
      for (const auto& [s, p] : sources) {
        if (s == name.text) error("duplicate parameter '" + name.text + "'", name);
      }
      sources.emplace_back(name.text, packed);
      if (is_punct(lex_.peek(), ',')) lex_.next();
    }
    lex_.next();
    std::size_t packed_count = 0;
    for (const auto& [s, p] : sources) packed_count += p ? 1 : 0;
    if (packed_count > 1) error("at most one packed parameter is allowed", open);
    for (const auto& [s, p] : sources) head.params.push_back(Param{bind(s), p});
    head.stage = parse_optional_stage_param("s");
    return head;
  }

  // `'[y]'` after a parameter list; binds a fresh name when absent.
  std::string parse_optional_stage_param(std::string_view fallback) {
    if (is_punct(lex_.peek(), '[') && lex_.peek(1).kind == Token::Kind::Ident && is_punct(lex_.peek(2), ']')) {
      lex_.next();
      Token name = lex_.next();
      lex_.next();
      return bind(name.text);
    }
    return names_.fresh(fallback);
  }

  TermPtr finish_braced_lambda(LambdaHead head) {
    expect_punct('{');
    BodyPtr body = parse_body(head.stage);
    expect_punct('}');
    scope_.resize(head.scope_mark);
    return mk::lambda(std::move(head.params), std::move(head.stage), std::move(body));
  }

  // terms ------------------------------------------------------------------

  TermPtr parse_term() {
    const Token& t = lex_.peek();
    if (is_punct(t, '(')) {
      LambdaHead head = parse_lambda_head();
      if (!is_punct(lex_.peek(), '{')) error("expected '{' to open the lambda body", lex_.peek());
      return finish_braced_lambda(std::move(head));
    }
    Token tok = lex_.next();
    switch (tok.kind) {
      case Token::Kind::Int: return mk::integer(tok.value);
      case Token::Kind::Str: return mk::str(tok.text);
      case Token::Kind::Ident:
        if (tok.text == "always") return mk::stage(Stage::Top);
        if (tok.text == "never") return mk::stage(Stage::Bottom);
        if (tok.text == "true") return mk::boolean(true);
        if (tok.text == "false") return mk::boolean(false);
        if (tok.text == "env" && is_punct(lex_.peek(), '{') && !lookup("env")) return parse_env_literal();
        return resolve(tok);
      case Token::Kind::Punct:
        if (tok.text == "!") {
          Token name = expect_ident();
          auto internal = lookup(name.text);
          if (!internal) error("unbound name '" + name.text + "'", name, ErrorKind::UnboundName);
          return mk::splice(*internal);
        }
        if (tok.text == "[") {
          std::vector<TermPtr> elements;
          while (!is_punct(lex_.peek(), ']')) {
            elements.push_back(parse_term());
            if (is_punct(lex_.peek(), ',')) lex_.next();
          }
          lex_.next();
          return mk::tuple(std::move(elements));
        }
        break;
      case Token::Kind::End: break;
    }
    error("unexpected '" + tok.text + "'", tok);
  }

  TermPtr parse_env_literal() {
    expect_punct('{');
    EnvEntries entries;
    while (!is_punct(lex_.peek(), '}')) {
      Token key = lex_.next();
      if (key.kind != Token::Kind::Str) error("expected a string key", key);
      expect_punct(':');
      entries.emplace_back(key.text, parse_term());
      if (is_punct(lex_.peek(), ',')) lex_.next();
    }
    lex_.next();
    return mk::env(std::move(entries));
  }

  // bodies -----------------------------------------------------------------

  BodyPtr parse_body(const std::string& natural_stage) {
    StageExprPtr stage;
    if (is_punct(lex_.peek(), '@')) {
      lex_.next();
      stage = parse_stage_or();
      expect_punct(':');
    } else {
      stage = StageExpr::ref(natural_stage);
    }
    if (at_terminator()) error("expected a body", lex_.peek());
    const Token& t = lex_.peek();
    if (is_ident(t, "let") && !lookup("let")) return parse_let(stage);
    if (is_ident(t, "fix") && !lookup("fix")) return parse_fix(stage);
    if (is_ident(t, "halt") && !lookup("halt")) {
      lex_.next();
      return mk::halt(stage);
    }
    if (t.kind == Token::Kind::Str && is_punct(lex_.peek(1), '(')) return parse_prim(stage);
    return parse_apply(stage);
  }

  BodyPtr parse_apply(StageExprPtr stage) {
    if (is_punct(lex_.peek(), '!')) error("a splice cannot be called", lex_.peek());
    TermPtr callee = parse_term();
    std::vector<TermPtr> args;
    while (!at_terminator()) {
      if (is_punct(lex_.peek(), '(')) {
        LambdaHead head = parse_lambda_head();
        if (is_punct(lex_.peek(), '{')) {
          args.push_back(finish_braced_lambda(std::move(head)));
          continue;
        }
        // last-argument lambda: its body is the remainder of the sequence
        BodyPtr body = parse_body(head.stage);
        scope_.resize(head.scope_mark);
        args.push_back(mk::lambda(std::move(head.params), std::move(head.stage), std::move(body)));
        break;
      }
      args.push_back(parse_term());
    }
    return mk::apply(std::move(stage), std::move(callee), std::move(args));
  }

  BodyPtr parse_prim(StageExprPtr stage) {
    Token text = lex_.next();
    PrimPtr expr;
    try {
      expr = read_prim(text.text, [&](std::string_view name) -> TermPtr {
        if (auto internal = lookup(name)) return mk::var(*internal);
        fail(ErrorKind::UnboundName, "unbound name '" + std::string(name) + "' in primitive expression");
      });
    } catch (const Error& e) {
      fail(e.kind(), e.detail(), position_of(lex_.text(), text.offset));
    }
    expect_punct('(');
    std::size_t mark = scope_.size();
    std::vector<std::string> sources;
    while (!is_punct(lex_.peek(), ')')) {
      sources.push_back(expect_ident().text);
      if (is_punct(lex_.peek(), ',')) lex_.next();
    }
    lex_.next();
    std::vector<std::string> binds;
    for (const auto& s : sources) binds.push_back(bind(s));
    std::string y = parse_optional_stage_param("s");
    if (at_terminator()) error("primitive expression needs a continuation body", lex_.peek());
    BodyPtr rest = parse_body(y);
    scope_.resize(mark);
    return mk::prim(std::move(stage), std::move(expr), std::move(binds), std::move(y), std::move(rest));
  }

  BodyPtr parse_let(StageExprPtr stage) {
    Token let_tok = lex_.next();
    std::size_t mark = scope_.size();
    std::optional<std::string> stage_source;
    if (is_punct(lex_.peek(), '[')) {
      lex_.next();
      stage_source = expect_ident().text;
      expect_punct(']');
    }
    Token name = expect_ident();
    TermPtr value;
    if (is_punct(lex_.peek(), '(')) {
      // `let f(params)'[s]' { body }` defines a local function
      LambdaHead head = parse_lambda_head();
      if (!is_punct(lex_.peek(), '{')) error("expected '{' after let function head", lex_.peek());
      value = finish_braced_lambda(std::move(head));
    } else {
      value = parse_term();
    }
    std::string x = bind(name.text);
    std::string y = stage_source ? bind(*stage_source) : names_.fresh("s");
    if (at_terminator()) error("let needs a body", let_tok, ErrorKind::UnboundSugar);
    BodyPtr rest = parse_body(y);
    scope_.resize(mark);
    TermPtr fn = mk::lambda({Param{x, false}}, y, std::move(rest));
    return mk::apply(std::move(stage), std::move(fn), {std::move(value)});
  }

  BodyPtr parse_fix(StageExprPtr stage) {
    Token fix_tok = lex_.next();
    std::size_t mark = scope_.size();
    std::optional<std::string> source_stage;
    if (is_punct(lex_.peek(), '[')) {
      lex_.next();
      source_stage = expect_ident().text;
      expect_punct(']');
    }
    Token name = expect_ident();
    std::string x = bind(name.text);
    TermPtr value = parse_term();
    std::string y = source_stage ? bind(*source_stage) : names_.fresh("s");
    if (at_terminator()) error("fix needs a body", fix_tok, ErrorKind::UnboundSugar);
    BodyPtr rest = parse_body(y);
    scope_.resize(mark);
    return mk::fix(std::move(stage), std::move(y), std::move(x), std::move(value), std::move(rest));
  }

  CoreLexer lex_;
  NameSupply& names_;
  std::vector<std::pair<std::string, std::string>> scope_;
};

// ---------------------------------------------------------------------------
// primitive expressions

class PrimParser {
 public:
  PrimParser(std::string_view text, const std::function<TermPtr(std::string_view)>& resolve)
      : text_(text), resolve_(resolve) {}

  PrimPtr parse() {
    PrimPtr e = parse_or();
    skip_ws();
    if (pos_ != text_.size()) error("unexpected trailing input in primitive expression");
    return e;
  }

 private:
  [[noreturn]] void error(const std::string& message) const {
    fail(ErrorKind::Syntax, message + " in \"" + std::string(text_) + "\"");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(std::string_view op) {
    skip_ws();
    if (text_.substr(pos_, op.size()) == op) {
      pos_ += op.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view op) {
    if (!eat(op)) error("expected '" + std::string(op) + "'");
  }

  PrimPtr parse_or() {
    auto lhs = parse_and();
    while (eat("||")) lhs = mk::binary("||", lhs, parse_and());
    return lhs;
  }

  PrimPtr parse_and() {
    auto lhs = parse_cmp();
    while (eat("&&")) lhs = mk::binary("&&", lhs, parse_cmp());
    return lhs;
  }

  PrimPtr parse_cmp() {
    auto lhs = parse_add();
    for (std::string_view op : {"==", "!=", "<=", ">=", "<", ">"}) {
      if (eat(op)) return mk::binary(std::string(op), lhs, parse_add());
    }
    return lhs;
  }

  PrimPtr parse_add() {
    auto lhs = parse_mul();
    while (true) {
      if (eat("+")) {
        lhs = mk::binary("+", lhs, parse_mul());
      } else if (eat("-")) {
        lhs = mk::binary("-", lhs, parse_mul());
      } else {
        return lhs;
      }
    }
  }

  PrimPtr parse_mul() {
    auto lhs = parse_unary();
    while (true) {
      if (eat("*")) {
        lhs = mk::binary("*", lhs, parse_unary());
      } else if (eat("/")) {
        lhs = mk::binary("/", lhs, parse_unary());
      } else if (eat("%")) {
        lhs = mk::binary("%", lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  PrimPtr parse_unary() {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '-') {
      ++pos_;
      skip_ws();
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        auto lit = parse_int();
        return mk::leaf(mk::integer(-lit));
      }
      return mk::unary('-', parse_unary());
    }
    if (pos_ < text_.size() && text_[pos_] == '!' && (pos_ + 1 >= text_.size() || text_[pos_ + 1] != '=')) {
      ++pos_;
      return mk::unary('!', parse_unary());
    }
    return parse_postfix();
  }

  std::int64_t parse_int() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    try {
      return std::stoll(std::string(text_.substr(start, pos_ - start)));
    } catch (const std::out_of_range&) {
      error("integer literal out of range");
    }
  }

  std::string parse_name() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) error("expected a name");
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::vector<PrimPtr> parse_args(char close) {
    std::vector<PrimPtr> args;
    skip_ws();
    if (eat(std::string_view(&close, 1))) return args;
    while (true) {
      args.push_back(parse_or());
      if (eat(",")) continue;
      expect(std::string_view(&close, 1));
      return args;
    }
  }

  PrimPtr parse_postfix() {
    auto e = parse_primary();
    while (eat(".")) {
      std::string m = parse_name();
      expect("(");
      e = mk::method(e, m, parse_args(')'));
    }
    return e;
  }

  PrimPtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) error("unexpected end of primitive expression");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return mk::leaf(mk::integer(parse_int()));
    if (c == '"') {
      auto s = read_quoted(text_, pos_);
      if (!s) error("unterminated string");
      return mk::leaf(mk::str(*s));
    }
    if (c == '(') {
      ++pos_;
      auto e = parse_or();
      expect(")");
      return e;
    }
    if (c == '[') {
      ++pos_;
      return mk::list(parse_args(']'));
    }
    if (ident_start(c)) {
      std::string name = parse_name();
      if (name == "true") return mk::leaf(mk::boolean(true));
      if (name == "false") return mk::leaf(mk::boolean(false));
      skip_ws();
      if (name == "env" && pos_ < text_.size() && text_[pos_] == '{') {
        ++pos_;
        return parse_env_entries();
      }
      if (pos_ < text_.size() && text_[pos_] == '(') {
        ++pos_;
        return mk::call(name, parse_args(')'));
      }
      return mk::leaf(resolve_(name));
    }
    error(std::string("unexpected '") + c + "'");
  }

  // Environment literals only appear in printed residuals.
  PrimPtr parse_env_entries() {
    EnvEntries entries;
    skip_ws();
    while (!eat("}")) {
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != '"') error("expected an environment key");
      auto key = read_quoted(text_, pos_);
      if (!key) error("unterminated string");
      expect(":");
      auto value = parse_or();
      const auto* leaf = std::get_if<PrimLeaf>(&value->node);
      if (!leaf) error("environment values must be literals or names");
      entries.emplace_back(*key, leaf->term);
      eat(",");
      skip_ws();
    }
    return mk::leaf(mk::env(std::move(entries)));
  }

  std::string_view text_;
  const std::function<TermPtr(std::string_view)>& resolve_;
  std::size_t pos_ = 0;
};

}  // namespace

bool is_builtin_name(std::string_view name) {
  static const std::unordered_set<std::string_view> builtins = {
      "if", "print", "exit", "newEnv", "build", "merge", "finalize", "concat", "arity",
  };
  return builtins.contains(name);
}

TermPtr read_core(std::string_view text, NameSupply& names) {
  CoreParser parser(text, 0, names);
  TermPtr t = parser.term();
  parser.expect_end();
  return t;
}

TermRead read_core_term_at(std::string_view text, std::size_t offset, NameSupply& names) {
  CoreParser parser(text, offset, names);
  TermPtr t = parser.term();
  return TermRead{std::move(t), parser.consumed_end()};
}

LambdaRead read_lambda_body_at(std::string_view text, std::size_t offset, const std::vector<std::string>& params,
                               std::string_view stage, NameSupply& names) {
  CoreParser parser(text, offset, names);
  return parser.lambda_body(params, stage);
}

PrimPtr read_prim(std::string_view text, const std::function<TermPtr(std::string_view)>& resolve) {
  return PrimParser(text, resolve).parse();
}

}  // namespace manydsl
