#include <algorithm>
#include <cctype>

#include "manydsl/grammar.hpp"
#include "manydsl/syntax.hpp"

namespace manydsl {

namespace {

SourcePos pos_at(std::string_view text, std::size_t offset) {
  SourcePos p{offset, 1, 1};
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

struct GTok {
  enum class Kind { Ident, Str, Punct, End } kind = Kind::End;
  std::string text;
  std::size_t offset = 0;
  std::size_t end = 0;
};

class GrammarLexer {
 public:
  explicit GrammarLexer(std::string_view text) : text_(text) {}

  const GTok& peek(std::size_t k = 0) {
    while (ahead_.size() <= k) ahead_.push_back(scan());
    return ahead_[k];
  }
  GTok next() {
    peek();
    GTok t = ahead_.front();
    ahead_.erase(ahead_.begin());
    return t;
  }
  void reset(std::size_t offset) {
    ahead_.clear();
    pos_ = offset;
  }
  std::string_view text() const { return text_; }

 private:
  GTok scan() {
    skip_trivia();
    GTok t;
    t.offset = pos_;
    if (pos_ >= text_.size()) {
      t.end = pos_;
      return t;
    }
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      t.kind = GTok::Kind::Ident;
      t.text = std::string(text_.substr(start, pos_ - start));
    } else if (c == '"') {
      ++pos_;
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
        s += text_[pos_++];
      }
      if (pos_ >= text_.size()) fail(ErrorKind::Syntax, "unterminated string", pos_at(text_, t.offset));
      ++pos_;
      t.kind = GTok::Kind::Str;
      t.text = std::move(s);
    } else {
      static const char* multi[] = {"::=", "->"};
      t.kind = GTok::Kind::Punct;
      for (const char* m : multi) {
        if (text_.substr(pos_).starts_with(m)) {
          t.text = m;
          break;
        }
      }
      if (t.text.empty()) {
        if (std::string_view("|()<>;,{}=.!:").find(c) == std::string_view::npos) {
          fail(ErrorKind::Syntax, std::string("unexpected character '") + c + "'", pos_at(text_, pos_));
        }
        t.text = std::string(1, c);
      }
      pos_ += t.text.size();
    }
    t.end = pos_;
    return t;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_.substr(pos_).starts_with("//")) {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<GTok> ahead_;
};

std::string collapse_ws(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

class GrammarParser {
 public:
  GrammarParser(std::string_view text, NameSupply& names) : lex_(text), names_(names) {}

  GrammarFile file() {
    GrammarFile f;
    while (lex_.peek().kind != GTok::Kind::End) {
      GTok kw = expect_ident();
      if (kw.text == "function") {
        f.templates.push_back(function());
      } else if (kw.text == "grammar") {
        f.grammars.push_back(grammar());
      } else {
        error("expected 'function' or 'grammar'", kw);
      }
    }
    return f;
  }

 private:
  [[noreturn]] void error(const std::string& msg, const GTok& at, ErrorKind kind = ErrorKind::Syntax) {
    fail(kind, msg, pos_at(lex_.text(), at.offset));
  }

  bool is(const GTok& t, std::string_view p) const { return t.kind == GTok::Kind::Punct && t.text == p; }

  GTok expect(std::string_view p) {
    GTok t = lex_.next();
    if (!is(t, p)) error("expected '" + std::string(p) + "'", t);
    return t;
  }

  GTok expect_ident() {
    GTok t = lex_.next();
    if (t.kind != GTok::Kind::Ident) error("expected a name", t);
    return t;
  }

  Template function() {
    Template t;
    t.name = expect_ident().text;
    expect("<");
    while (!is(lex_.peek(), ">")) {
      t.params.push_back(expect_ident().text);
      if (is(lex_.peek(), ",")) lex_.next();
    }
    lex_.next();
    expect("{");
    while (!is(lex_.peek(), "}")) {
      const GTok& t0 = lex_.peek();
      if (t0.kind == GTok::Kind::Ident && t0.text == "alias") {
        lex_.next();
        t.aliases.push_back(alias());
      } else if (t0.kind == GTok::Kind::Ident && t0.text == "return") {
        lex_.next();
        t.result = expect_ident().text;
        expect(";");
      } else {
        auto ps = production();
        t.productions.insert(t.productions.end(), ps.begin(), ps.end());
      }
    }
    lex_.next();
    if (t.result.empty()) fail(ErrorKind::Grammar, "template '" + t.name + "' has no return rule");
    return t;
  }

  AliasDef alias() {
    AliasDef a;
    expect("|");
    a.name = expect_ident().text;
    expect("|");
    expect("=");
    expect("|");
    if (is(lex_.peek(), "(")) {
      lex_.next();
      a.names = names_until(")");
    } else {
      a.param = expect_ident().text;
      expect(":");
      GTok q = expect_ident();
      if (q.text != "in" && q.text != "out") {
        error("unknown signature query '" + q.text + "'", q, ErrorKind::UnknownSignatureQuery);
      }
      a.out = q.text == "out";
    }
    expect("|");
    expect(";");
    return a;
  }

  GrammarDecl grammar() {
    GrammarDecl g;
    g.name = expect_ident().text;
    expect("{");
    while (!is(lex_.peek(), "}")) {
      for (auto& p : production()) {
        if (p.entry && std::find(g.entries.begin(), g.entries.end(), p.head) == g.entries.end()) {
          g.entries.push_back(p.head);
        }
        for (const auto& u : p.body) {
          if (u.kind == UseKind::Foreign) g.foreign.emplace(u.lang, u.name);
        }
        g.productions.push_back(std::move(p));
      }
    }
    lex_.next();
    return g;
  }

  // names inside `( ... )`; `p.x` is kept verbatim for template expansion
  NameList names_until(std::string_view close) {
    NameList out;
    while (!is(lex_.peek(), close)) {
      std::string n = expect_ident().text;
      if (is(lex_.peek(), ".")) {
        lex_.next();
        n += "." + expect_ident().text;
      }
      out.push_back(std::move(n));
      if (is(lex_.peek(), ",")) lex_.next();
    }
    lex_.next();
    return out;
  }

  // `|(a,b)->|`
  NameList ins_prefix() {
    expect("|");
    expect("(");
    NameList ins = names_until(")");
    expect("->");
    expect("|");
    return ins;
  }

  // `|->(a,b)|` after a name, if present
  OptNames outs_suffix() {
    if (is(lex_.peek(), "|") && is(lex_.peek(1), "->")) {
      lex_.next();
      lex_.next();
      expect("(");
      NameList outs = names_until(")");
      expect("|");
      return outs;
    }
    return std::nullopt;
  }

  bool starts_attr_list() { return is(lex_.peek(), "|") && is(lex_.peek(1), "("); }

  bool is_action_head() {
    // |( names )->( ... distinguishes an action from an input prefix
    if (!starts_attr_list()) return false;
    std::size_t k = 2;
    while (!is(lex_.peek(k), ")")) {
      if (lex_.peek(k).kind == GTok::Kind::End) return false;
      ++k;
    }
    return is(lex_.peek(k + 1), "->") && is(lex_.peek(k + 2), "(");
  }

  std::vector<Production> production() {
    Production head;
    const GTok& first = lex_.peek();
    head.pos = pos_at(lex_.text(), first.offset);
    if (first.kind == GTok::Kind::Ident && first.text == "entry") {
      lex_.next();
      head.entry = true;
    }
    if (starts_attr_list()) head.ins = ins_prefix();
    head.head = expect_ident().text;
    head.outs = outs_suffix();
    expect("::=");
    std::vector<Production> out;
    while (true) {
      Production p = head;
      p.body = alternative();
      out.push_back(std::move(p));
      GTok t = lex_.next();
      if (is(t, ";")) break;
      if (!is(t, "|")) error("expected ';' or '|'", t);
    }
    return out;
  }

  std::vector<TermUse> alternative() {
    std::vector<TermUse> body;
    while (true) {
      const GTok& t = lex_.peek();
      if (is(t, ";") || t.kind == GTok::Kind::End) break;
      if (is(t, "|") && !is(lex_.peek(1), "(")) break;
      body.push_back(term());
    }
    return body;
  }

  TermUse action_use() {
    GTok start = lex_.peek();
    lex_.next();
    expect("(");
    NameList ins = names_until(")");
    expect("->");
    expect("(");
    NameList outs = names_until(")");
    expect("|");
    GTok open = expect("{");
    NameList params = ins;
    params.push_back("return");
    for (const auto& p : ins) {
      if (p.find('.') != std::string::npos) error("action parameters cannot be prefixed names", start);
    }
    LambdaRead r = read_lambda_body_at(lex_.text(), open.end, params, "parse", names_);
    TermUse u;
    u.kind = UseKind::Action;
    u.declared_ins = ins;
    u.declared_outs = outs;
    u.ins = ins;
    u.outs = outs;
    u.lambda = r.lambda;
    u.source = collapse_ws(lex_.text().substr(open.end, r.end - open.end));
    u.pos = pos_at(lex_.text(), start.offset);
    lex_.reset(r.end);
    expect("}");
    return u;
  }

  TermUse term() {
    const GTok& t = lex_.peek();
    SourcePos pos = pos_at(lex_.text(), t.offset);
    if (t.kind == GTok::Kind::Str) {
      TermUse u = use::literal(lex_.next().text);
      u.pos = pos;
      return u;
    }
    if (is_action_head()) return action_use();
    OptNames ins;
    if (starts_attr_list()) ins = ins_prefix();
    TermUse u;
    u.pos = pos;
    if (is(lex_.peek(), "!")) {
      lex_.next();
      u.kind = UseKind::Foreign;
      u.lang = expect_ident().text;
      expect(".");
      u.name = expect_ident().text;
    } else {
      GTok name = expect_ident();
      if (is(lex_.peek(), "<")) {
        if (ins) error("a template call takes no input list", name);
        return call(name.text, pos);
      }
      u.name = name.text;
      if (name.text == "epsilon") {
        u.kind = UseKind::Epsilon;
      } else if (is_token_class(name.text)) {
        u.kind = UseKind::Token;
      } else {
        u.kind = UseKind::Nonterminal;
      }
    }
    u.ins = ins;
    u.outs = outs_suffix();
    return u;
  }

  TermUse call(const std::string& name, SourcePos pos) {
    expect("<");
    TermUse u;
    u.kind = UseKind::Call;
    u.name = name;
    u.pos = pos;
    while (!is(lex_.peek(), ">")) {
      u.args.push_back(template_arg());
      if (is(lex_.peek(), ",")) lex_.next();
    }
    lex_.next();
    return u;
  }

  TemplateArg template_arg() {
    TemplateArg a;
    const GTok& t = lex_.peek();
    if (t.kind == GTok::Kind::Str) {
      a.kind = TemplateArg::Kind::Literal;
      a.text = lex_.next().text;
      return a;
    }
    if (is_action_head()) {
      a.kind = TemplateArg::Kind::Action;
      a.action = std::make_shared<TermUse>(action_use());
      return a;
    }
    if (is(t, "|")) {
      // `|(a,b)|` name tuple or `|epsilon|`
      lex_.next();
      if (is(lex_.peek(), "(")) {
        lex_.next();
        a.kind = TemplateArg::Kind::Tuple;
        a.names = names_until(")");
      } else {
        GTok e = expect_ident();
        if (e.text != "epsilon") error("expected a name tuple or epsilon", e);
        a.kind = TemplateArg::Kind::Epsilon;
      }
      expect("|");
      return a;
    }
    GTok name = expect_ident();
    a.kind = name.text == "epsilon" ? TemplateArg::Kind::Epsilon : TemplateArg::Kind::Name;
    a.text = name.text;
    return a;
  }

  GrammarLexer lex_;
  NameSupply& names_;
};

}  // namespace

GrammarFile read_grammar(std::string_view text, NameSupply& names) { return GrammarParser(text, names).file(); }

}  // namespace manydsl
