#include "tracepi/parser.hpp"

#include <cctype>
#include <functional>
#include <vector>

namespace tracepi {

namespace {

struct Tok {
  enum class Type { Id, Num, Sym, End };
  Type type = Type::End;
  std::string text;
  std::size_t line = 1;
  std::size_t col = 1;
};

bool id_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '#'; }
bool id_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Tok> lex(const std::string& text) {
  std::vector<Tok> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Tok t;
    t.line = line;
    t.col = col;
    if (id_start(c)) {
      std::size_t j = i + 1;
      while (j < text.size() && id_char(text[j])) ++j;
      t.type = Tok::Type::Id;
      t.text = text.substr(i, j - i);
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      t.type = Tok::Type::Num;
      t.text = text.substr(i, j - i);
      advance(j - i);
    } else {
      t.type = Tok::Type::Sym;
      if (c == '-' && i + 1 < text.size() && text[i + 1] == '>')
        t.text = "->";
      else if (c == '!' && i + 1 < text.size() && text[i + 1] == '=')
        t.text = "!=";
      else if (std::string("(){}<>,./+|=!-").find(c) != std::string::npos)
        t.text = std::string(1, c);
      else
        throw ParseError(std::string("stray character '") + c + "'", line, col);
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Tok end;
  end.type = Tok::Type::End;
  end.text = "end of input";
  end.line = line;
  end.col = col;
  out.push_back(std::move(end));
  return out;
}

class TokStream {
 public:
  explicit TokStream(std::vector<Tok> toks) : toks_(std::move(toks)) {}

  const Tok& peek(std::size_t k = 0) const {
    std::size_t at = pos_ + k;
    return at < toks_.size() ? toks_[at] : toks_.back();
  }
  Tok eat() {
    Tok t = peek();
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_end() const { return peek().type == Tok::Type::End; }
  bool at_sym(const char* s) const {
    return peek().type == Tok::Type::Sym && peek().text == s;
  }
  bool at_id(const char* s) const { return peek().type == Tok::Type::Id && peek().text == s; }
  bool take_sym(const char* s) {
    if (!at_sym(s)) return false;
    eat();
    return true;
  }
  void expect_sym(const char* s) {
    if (!at_sym(s)) fail(std::string("expected '") + s + "', found '" + peek().text + "'");
    eat();
  }
  std::string expect_id(const char* what) {
    if (peek().type != Tok::Type::Id)
      fail(std::string("expected ") + what + ", found '" + peek().text + "'");
    return eat().text;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().col);
  }

  void reset() { pos_ = 0; }
  std::size_t save() const { return pos_; }
  void restore(std::size_t p) { pos_ = p; }

 private:
  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
};

using Classifier = std::function<Term(const std::string&, const Tok&)>;

Term parse_term(TokStream& ts, const Signature& sig, const Classifier& atom) {
  Tok head = ts.peek();
  std::string id = ts.expect_id("a term");
  if (!ts.at_sym("(")) return atom(id, head);
  ts.eat();
  std::vector<Term> args;
  if (!ts.at_sym(")")) {
    args.push_back(parse_term(ts, sig, atom));
    while (ts.take_sym(",")) args.push_back(parse_term(ts, sig, atom));
  }
  ts.expect_sym(")");
  if (!sig.known(id))
    throw ParseError("unknown function symbol '" + id + "'", head.line, head.col);
  if (sig.arity(id) != args.size())
    throw ParseError("'" + id + "' expects " + std::to_string(sig.arity(id)) + " arguments, got " +
                         std::to_string(args.size()),
                     head.line, head.col);
  return Term::app(id, std::move(args));
}

void reject_reserved(const std::string& id, const Tok& at) {
  if (!id.empty() && id[0] == '#')
    throw ParseError("identifier '" + id + "' uses the reserved '#' prefix", at.line, at.col);
}

// ---------------------------------------------------------------------------
// Processes.  Two passes over one token stream: the first collects every
// identifier with a variable role (declared, input-bound, substitution
// domain), the second builds the tree classifying identifiers against that
// registry.

class ProcParser {
 public:
  ProcParser(TokStream& ts, const Signature& sig, bool collecting,
             std::set<std::string>& registry, std::set<std::string>& subst_domains)
      : ts_(ts),
        sig_(sig),
        collecting_(collecting),
        registry_(registry),
        domains_(subst_domains) {}

  Process file() {
    while (ts_.at_id("var")) declaration();
    Process p = parallel();
    if (!ts_.at_end()) ts_.fail("unexpected '" + ts_.peek().text + "' after the process");
    return p;
  }

 private:
  void declaration() {
    ts_.eat();
    do {
      Tok at = ts_.peek();
      std::string id = ts_.expect_id("a variable");
      reject_reserved(id, at);
      registry_.insert(id);
    } while (ts_.take_sym(","));
    ts_.expect_sym(".");
  }

  Term term() {
    return parse_term(ts_, sig_, [this](const std::string& id, const Tok& at) {
      reject_reserved(id, at);
      return registry_.count(id) ? Term::var(id) : Term::name(id);
    });
  }

  Process parallel() {
    std::vector<Process> parts{sum()};
    while (ts_.take_sym("|")) parts.push_back(sum());
    return parts.size() == 1 ? std::move(parts.front()) : Process::parallel(std::move(parts));
  }

  Process sum() {
    Process p = basic();
    while (ts_.take_sym("+")) p = Process::choice(std::move(p), basic());
    return p;
  }

  Process continuation() { return ts_.take_sym(".") ? basic() : Process::nil(); }

  Process basic() {
    const Tok& t = ts_.peek();
    if (t.type == Tok::Type::Num) {
      if (t.text != "0") ts_.fail("expected a process");
      ts_.eat();
      return Process::nil();
    }
    if (ts_.take_sym("(")) {
      Process p = parallel();
      ts_.expect_sym(")");
      return p;
    }
    if (ts_.take_sym("!")) return Process::replicate(basic());
    if (ts_.take_sym("{")) {
      Term image = term();
      ts_.expect_sym("/");
      Tok at = ts_.peek();
      std::string x = ts_.expect_id("a variable");
      reject_reserved(x, at);
      ts_.expect_sym("}");
      registry_.insert(x);
      domains_.insert(x);
      return Process::active_subst(x, std::move(image));
    }
    if (t.type != Tok::Type::Id) ts_.fail("expected a process");
    if (ts_.at_id("new")) {
      ts_.eat();
      Tok at = ts_.peek();
      std::string id = ts_.expect_id("an identifier");
      reject_reserved(id, at);
      ts_.expect_sym(".");
      Process body = basic();
      // The first pass fills `domains_`; on the second a restriction binds a
      // variable exactly when the spelling is a substitution domain.
      if (!collecting_ && domains_.count(id)) return Process::restrict_var(id, std::move(body));
      return Process::restrict_name(id, std::move(body));
    }
    if (ts_.at_id("out")) {
      ts_.eat();
      ts_.expect_sym("(");
      Term ch = term();
      ts_.expect_sym(",");
      Term payload = term();
      ts_.expect_sym(")");
      return Process::output(std::move(ch), std::move(payload), continuation());
    }
    if (ts_.at_id("in")) {
      ts_.eat();
      ts_.expect_sym("(");
      Term ch = term();
      ts_.expect_sym(",");
      Tok at = ts_.peek();
      std::string x = ts_.expect_id("a variable");
      reject_reserved(x, at);
      ts_.expect_sym(")");
      registry_.insert(x);
      return Process::input(std::move(ch), x, continuation());
    }
    if (ts_.at_id("if")) {
      ts_.eat();
      Term lhs = term();
      ts_.expect_sym("=");
      Term rhs = term();
      if (!ts_.at_id("then")) ts_.fail("expected 'then'");
      ts_.eat();
      Process then_k = basic();
      Process else_k = Process::nil();
      if (ts_.at_id("else")) {
        ts_.eat();
        else_k = basic();
      }
      return Process::match(std::move(lhs), std::move(rhs), std::move(then_k), std::move(else_k));
    }
    ts_.fail("expected a process");
  }

  TokStream& ts_;
  const Signature& sig_;
  bool collecting_;
  std::set<std::string>& registry_;
  std::set<std::string>& domains_;
};

// ---------------------------------------------------------------------------
// Formulas.

class FrmParser {
 public:
  FrmParser(TokStream& ts, const Signature& sig, std::set<std::string> vars)
      : ts_(ts), sig_(sig), vars_(std::move(vars)) {}

  Formula top_level() {
    Formula f = implication();
    if (!ts_.at_end()) ts_.fail("unexpected '" + ts_.peek().text + "' after the formula");
    return f;
  }

 private:
  Term term() {
    return parse_term(ts_, sig_, [this](const std::string& id, const Tok&) {
      bool var = (!id.empty() && id[0] == '#') || vars_.count(id);
      return var ? Term::var(id) : Term::name(id);
    });
  }

  Formula implication() {
    Formula l = disjunction();
    if (ts_.take_sym("->")) return Formula::implies(std::move(l), implication());
    return l;
  }

  Formula disjunction() {
    Formula l = conjunction();
    while (ts_.at_id("or")) {
      ts_.eat();
      l = Formula::lor(std::move(l), conjunction());
    }
    return l;
  }

  Formula conjunction() {
    Formula l = unary();
    while (ts_.at_id("and")) {
      ts_.eat();
      l = Formula::land(std::move(l), unary());
    }
    return l;
  }

  Formula unary() {
    if (ts_.at_id("not")) {
      ts_.eat();
      return Formula::lnot(unary());
    }
    if (ts_.at_id("G")) {
      ts_.eat();
      return Formula::globally(unary());
    }
    if (ts_.at_id("F")) {
      ts_.eat();
      return Formula::future(unary());
    }
    if (ts_.at_id("K")) {
      ts_.eat();
      return Formula::knows(unary());
    }
    if (ts_.at_id("P")) {
      ts_.eat();
      return Formula::possible(unary());
    }
    if (ts_.at_sym("<")) return step_observer();
    if (ts_.take_sym("(")) {
      Formula f = implication();
      ts_.expect_sym(")");
      return f;
    }
    if (ts_.at_id("true")) {
      ts_.eat();
      return Formula::top();
    }
    Term lhs = term();
    if (ts_.take_sym("=")) return Formula::eq(std::move(lhs), term());
    if (ts_.take_sym("!=")) return Formula::neq(std::move(lhs), term());
    if (ts_.at_id("in")) {
      ts_.eat();
      if (!ts_.at_id("dom")) ts_.fail("expected 'dom'");
      ts_.eat();
      return Formula::in_dom(std::move(lhs));
    }
    ts_.fail("expected '=', '!=' or 'in dom' after a term");
  }

  Formula step_observer() {
    ts_.expect_sym("<");
    Action act = Action::silent();
    std::string alias;
    if (ts_.at_id("tau")) {
      ts_.eat();
    } else if (ts_.at_id("out")) {
      ts_.eat();
      ts_.expect_sym("(");
      Term ch = term();
      ts_.expect_sym(",");
      alias = ts_.expect_id("an alias");
      ts_.expect_sym(")");
      act = Action::output(std::move(ch), alias);
    } else if (ts_.at_id("in")) {
      ts_.eat();
      ts_.expect_sym("(");
      Term ch = term();
      ts_.expect_sym(",");
      Term payload = term();
      ts_.expect_sym(")");
      act = Action::input(std::move(ch), std::move(payload));
    } else {
      ts_.fail("expected 'out', 'in' or 'tau'");
    }
    ts_.expect_sym(">");
    ts_.expect_sym("-");
    bool fresh = !alias.empty() && vars_.insert(alias).second;
    Formula body = unary();
    if (fresh) vars_.erase(alias);
    return Formula::prev(std::move(act), std::move(body));
  }

  TokStream& ts_;
  const Signature& sig_;
  std::set<std::string> vars_;  // in-scope variable spellings, aliases included
};

}  // namespace

std::pair<Signature, RewriteSystem> parse_theory(const std::string& text) {
  TokStream ts(lex(text));
  Signature sig;
  std::vector<std::pair<Term, Term>> rules;
  std::vector<std::pair<std::string, std::string>> comms;
  Classifier rule_var = [](const std::string& id, const Tok& at) {
    reject_reserved(id, at);
    return Term::var(id);
  };
  while (!ts.at_end()) {
    Tok at = ts.peek();
    std::string kw = ts.expect_id("'fun', 'reduc' or 'comm'");
    if (kw == "fun") {
      Tok name_at = ts.peek();
      std::string name = ts.expect_id("a function name");
      reject_reserved(name, name_at);
      ts.expect_sym("/");
      if (ts.peek().type != Tok::Type::Num) ts.fail("expected an arity");
      std::size_t arity = std::stoul(ts.eat().text);
      if (sig.known(name))
        throw ParseError("'" + name + "' declared twice", name_at.line, name_at.col);
      sig.declare(name, arity);
    } else if (kw == "reduc") {
      Term lhs = parse_term(ts, sig, rule_var);
      ts.expect_sym("->");
      Term rhs = parse_term(ts, sig, rule_var);
      rules.emplace_back(std::move(lhs), std::move(rhs));
    } else if (kw == "comm") {
      std::string f = ts.expect_id("a function name");
      if (!ts.at_id("via")) ts.fail("expected 'via'");
      ts.eat();
      std::string g = ts.expect_id("a function name");
      comms.emplace_back(std::move(f), std::move(g));
    } else {
      throw ParseError("expected 'fun', 'reduc' or 'comm', found '" + kw + "'", at.line, at.col);
    }
    ts.expect_sym(".");
  }
  RewriteSystem rs(sig);
  for (auto& [lhs, rhs] : rules) rs.add_rule(std::move(lhs), std::move(rhs));
  for (const auto& [f, g] : comms) rs.add_commutation(f, g);
  return {std::move(sig), std::move(rs)};
}

Process parse_process(const std::string& text, const Signature& sig) {
  TokStream ts(lex(text));
  std::set<std::string> registry;
  std::set<std::string> domains;
  ProcParser(ts, sig, true, registry, domains).file();
  ts.reset();
  Process p = ProcParser(ts, sig, false, registry, domains).file();
  WellFormedness wf = well_formed(p);
  if (!wf.ok) throw ProcessError(wf.issue);
  return p;
}

Formula parse_formula(const std::string& text, const Signature& sig,
                      const std::set<std::string>& vars) {
  TokStream ts(lex(text));
  return FrmParser(ts, sig, vars).top_level();
}

Formula parse_static_formula(const std::string& text, const Signature& sig,
                             const std::set<std::string>& vars) {
  TokStream ts(lex(text));
  Tok first = ts.peek();
  Formula f = FrmParser(ts, sig, vars).top_level();
  if (!is_static(f))
    throw ParseError("StaticContextViolation: modal operator in '" + formula_to_string(f) + "'",
                     first.line, first.col);
  return f;
}

}  // namespace tracepi
