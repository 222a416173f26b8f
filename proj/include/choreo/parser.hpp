#ifndef CHOREO_PARSER_HPP
#define CHOREO_PARSER_HPP

#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "choreo/ast.hpp"

// Textual DSL for systems (.lst) and global types (.gt).
//
//   behaviour:  a!<sort>  a?<sort>   sort omitted = unit
//               (+) internal choice, + external choice, '.' prefix,
//               end, rec X . P, X
//   system:     Name = behaviour;   queue a = [s1, s2];
//   global:     s->r:a<sort>, '|' par, '(+)' choice, ';;' sequencing,
//               rec X . G, end, '*' as the anonymous sender
//
// Precedence: prefix > choice > par > ';;'. Comments run from // to newline.

namespace choreo {

struct SourceSpan {
  std::string file;
  int line = 1;
  int column = 1;
  int length = 1;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, SourceSpan span)
      : std::runtime_error(span.file + ":" + std::to_string(span.line) + ":" +
                           std::to_string(span.column) + ": " + msg),
        span_(std::move(span)) {}
  const SourceSpan& span() const { return span_; }

 private:
  SourceSpan span_;
};

namespace detail {

enum class Tok {
  Ident, Star, Bang, Query, Lt, Gt, Dot, IntChoice, ExtChoice, LParen, RParen,
  Eq, Semi, SeqOp, Arrow, Colon, Bar, Comma, LBrack, RBrack, KwEnd, KwRec, KwQueue, Eof
};

struct Token {
  Tok kind;
  std::string text;
  SourceSpan span;
};

class Lexer {
 public:
  Lexer(std::string_view src, std::string file) : src_(src), file_(std::move(file)) { next(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    next();
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, tok_.span); }

 private:
  void next() {
    skip_ws();
    tok_.span = here(1);
    if (pos_ >= src_.size()) {
      tok_ = {Tok::Eof, "", here(1)};
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      std::string word(src_.substr(start, pos_ - start));
      Tok k = Tok::Ident;
      if (word == "end") k = Tok::KwEnd;
      else if (word == "rec") k = Tok::KwRec;
      else if (word == "queue") k = Tok::KwQueue;
      tok_ = {k, word, span_from(start)};
      return;
    }
    auto two = src_.substr(pos_, 2);
    auto three = src_.substr(pos_, 3);
    if (three == "(+)") { tok_ = {Tok::IntChoice, "(+)", here(3)}; advance(3); return; }
    if (two == ";;") { tok_ = {Tok::SeqOp, ";;", here(2)}; advance(2); return; }
    if (two == "->") { tok_ = {Tok::Arrow, "->", here(2)}; advance(2); return; }
    switch (c) {
      case '*': tok_ = {Tok::Star, "*", here(1)}; advance(); return;
      case '!': tok_ = {Tok::Bang, "!", here(1)}; advance(); return;
      case '?': tok_ = {Tok::Query, "?", here(1)}; advance(); return;
      case '<': tok_ = {Tok::Lt, "<", here(1)}; advance(); return;
      case '>': tok_ = {Tok::Gt, ">", here(1)}; advance(); return;
      case '.': tok_ = {Tok::Dot, ".", here(1)}; advance(); return;
      case '+': tok_ = {Tok::ExtChoice, "+", here(1)}; advance(); return;
      case '(': tok_ = {Tok::LParen, "(", here(1)}; advance(); return;
      case ')': tok_ = {Tok::RParen, ")", here(1)}; advance(); return;
      case '=': tok_ = {Tok::Eq, "=", here(1)}; advance(); return;
      case ';': tok_ = {Tok::Semi, ";", here(1)}; advance(); return;
      case ':': tok_ = {Tok::Colon, ":", here(1)}; advance(); return;
      case '|': tok_ = {Tok::Bar, "|", here(1)}; advance(); return;
      case ',': tok_ = {Tok::Comma, ",", here(1)}; advance(); return;
      case '[': tok_ = {Tok::LBrack, "[", here(1)}; advance(); return;
      case ']': tok_ = {Tok::RBrack, "]", here(1)}; advance(); return;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", here(1));
    }
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance(size_t n = 1) {
    for (size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') { ++line_; col_ = 1; } else { ++col_; }
      ++pos_;
    }
  }

  SourceSpan here(int len) const { return SourceSpan{file_, line_, col_, len}; }
  SourceSpan span_from(size_t start) const {
    return SourceSpan{file_, line_, col_ - static_cast<int>(pos_ - start),
                      static_cast<int>(pos_ - start)};
  }

  std::string_view src_;
  std::string file_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
 public:
  Parser(std::string_view src, std::string file) : lex_(src, std::move(file)) {}

  System system() {
    System s;
    while (lex_.peek().kind != Tok::Eof) {
      if (lex_.peek().kind == Tok::KwQueue) {
        lex_.take();
        auto a = expect_ident("channel name");
        expect(Tok::Eq, "=");
        expect(Tok::LBrack, "[");
        std::vector<Sort> contents;
        if (lex_.peek().kind != Tok::RBrack) {
          contents.push_back(Sort{expect_ident("sort")});
          while (lex_.peek().kind == Tok::Comma) {
            lex_.take();
            contents.push_back(Sort{expect_ident("sort")});
          }
        }
        expect(Tok::RBrack, "]");
        expect(Tok::Semi, ";");
        if (s.queues.count(a)) lex_.fail("duplicate queue for channel " + a);
        s.queues.emplace(a, std::move(contents));
      } else {
        auto span = lex_.peek().span;
        auto n = expect_ident("participant name");
        expect(Tok::Eq, "=");
        auto b = behaviour();
        expect(Tok::Semi, ";");
        if (s.participants.count(n))
          throw ParseError("duplicate participant " + n, span);
        s.participants.emplace(n, std::move(b));
      }
    }
    check_closed(s);
    return s;
  }

  GlobalPtr global() {
    auto g = gseq_level();
    if (lex_.peek().kind != Tok::Eof) lex_.fail("trailing input after global type");
    auto errs = validate_global(g);
    if (!errs.empty()) lex_.fail(errs.front());
    return g;
  }

 private:
  // --- behaviours ---

  BehaviourPtr behaviour() {
    auto first = prefix_term();
    Tok op = lex_.peek().kind;
    if (op != Tok::IntChoice && op != Tok::ExtChoice) return first;
    BKind want = op == Tok::IntChoice ? BKind::Internal : BKind::External;
    std::vector<Branch> branches = choice_operand(first, want);
    while (lex_.peek().kind == op) {
      lex_.take();
      auto next = prefix_term();
      auto more = choice_operand(next, want);
      branches.insert(branches.end(), more.begin(), more.end());
    }
    if (lex_.peek().kind == Tok::IntChoice || lex_.peek().kind == Tok::ExtChoice)
      lex_.fail("cannot mix (+) and + in one choice");
    return want == BKind::Internal ? internal_choice(std::move(branches))
                                   : external_choice(std::move(branches));
  }

  std::vector<Branch> choice_operand(const BehaviourPtr& b, BKind want) {
    if (b->kind != want || b->branches.empty())
      lex_.fail(want == BKind::Internal ? "operand of (+) must be an output-guarded term"
                                        : "operand of + must be an input-guarded term");
    return b->branches;
  }

  BehaviourPtr prefix_term() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::KwEnd: lex_.take(); return bzero();
      case Tok::KwRec: {
        lex_.take();
        auto x = expect_ident("recursion variable");
        expect(Tok::Dot, ".");
        auto body = behaviour();
        return brec(x, std::move(body));
      }
      case Tok::LParen: {
        lex_.take();
        auto b = behaviour();
        expect(Tok::RParen, ")");
        return b;
      }
      case Tok::Ident: {
        // guard (a! / a?) or a recursion variable
        Token id = lex_.take();
        Tok k = lex_.peek().kind;
        if (k == Tok::Bang || k == Tok::Query) {
          lex_.take();
          Sort e = opt_sort();
          BehaviourPtr cont = bzero();
          if (lex_.peek().kind == Tok::Dot) {
            lex_.take();
            cont = prefix_term();
          }
          Branch br{Channel{id.text}, std::move(e), std::move(cont)};
          return k == Tok::Bang ? internal_choice({std::move(br)}) : external_choice({std::move(br)});
        }
        return bvar(id.text);
      }
      default:
        lex_.fail("expected a behaviour");
    }
  }

  Sort opt_sort() {
    if (lex_.peek().kind != Tok::Lt) return Sort{};
    lex_.take();
    Sort e;
    if (lex_.peek().kind == Tok::Ident) e = Sort{lex_.take().text};
    expect(Tok::Gt, ">");
    return e;
  }

  void check_closed(const System& s) {
    auto errs = validate_system(s);
    for (const auto& e : errs)
      if (e.find("unbound") != std::string::npos) lex_.fail(e);
  }

  // --- global types ---

  GlobalPtr gseq_level() {
    auto l = gpar_level();
    if (lex_.peek().kind == Tok::SeqOp) {
      lex_.take();
      auto r = gseq_level();
      return gseq(std::move(l), std::move(r));
    }
    return l;
  }

  GlobalPtr gpar_level() {
    auto l = gchoice_level();
    while (lex_.peek().kind == Tok::Bar) {
      lex_.take();
      auto r = gchoice_level();
      l = gpar(std::move(l), std::move(r));
    }
    return l;
  }

  GlobalPtr gchoice_level() {
    auto l = gprefix_level();
    while (lex_.peek().kind == Tok::IntChoice) {
      lex_.take();
      auto r = gprefix_level();
      l = gchoice(std::move(l), std::move(r));
    }
    return l;
  }

  GlobalPtr gprefix_level() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::KwEnd: lex_.take(); return gend();
      case Tok::KwRec: {
        lex_.take();
        auto x = expect_ident("recursion variable");
        expect(Tok::Dot, ".");
        auto body = gseq_level();
        return grec(x, std::move(body));
      }
      case Tok::LParen: {
        lex_.take();
        auto g = gseq_level();
        expect(Tok::RParen, ")");
        return g;
      }
      case Tok::Star:
      case Tok::Ident: {
        Token id = lex_.take();
        if (lex_.peek().kind == Tok::Arrow) {
          lex_.take();
          auto span = lex_.peek().span;
          auto r = expect_ident("receiver");
          expect(Tok::Colon, ":");
          auto a = expect_ident("channel");
          Sort e = opt_sort();
          GlobalPtr cont = gend();
          if (lex_.peek().kind == Tok::Dot) {
            lex_.take();
            cont = gprefix_level();
          }
          Participant s = id.kind == Tok::Star ? Participant::star() : Participant{id.text};
          if (s.name == r) throw ParseError("sender equals receiver", span);
          return gmsg(std::move(s), Participant{r}, Channel{a}, std::move(e), std::move(cont));
        }
        if (id.kind == Tok::Star) lex_.fail("* can only appear as a sender");
        return gvar(id.text);
      }
      default:
        lex_.fail("expected a global type");
    }
  }

  // --- helpers ---

  std::string expect_ident(const std::string& what) {
    if (lex_.peek().kind != Tok::Ident) lex_.fail("expected " + what);
    return lex_.take().text;
  }

  void expect(Tok k, const std::string& what) {
    if (lex_.peek().kind != k) lex_.fail("expected '" + what + "'");
    lex_.take();
  }

  Lexer lex_;
};

}  // namespace detail

inline System parse_system(std::string_view text, std::string file = "<input>") {
  return detail::Parser(text, std::move(file)).system();
}

inline GlobalPtr parse_global(std::string_view text, std::string file = "<input>") {
  return detail::Parser(text, std::move(file)).global();
}

// ---------------------------------------------------------------------------
// Printing; output re-parses to an equal term.

namespace detail {

inline void print_sort(std::ostringstream& os, const Sort& e) {
  if (!e.is_unit()) os << '<' << e.name << '>';
}

inline void print_behaviour(std::ostringstream& os, const BehaviourPtr& p, bool atom) {
  switch (p->kind) {
    case BKind::Internal:
    case BKind::External: {
      if (p->branches.empty()) { os << "end"; return; }
      bool choice = p->branches.size() > 1;
      if (choice && atom) os << '(';
      const char* sep = p->kind == BKind::Internal ? " (+) " : " + ";
      bool first = true;
      for (const auto& b : p->branches) {
        if (!first) os << sep;
        first = false;
        os << b.channel.name << (p->kind == BKind::Internal ? '!' : '?');
        print_sort(os, b.sort);
        if (!is_zero(b.cont)) {
          os << ". ";
          print_behaviour(os, b.cont, true);
        }
      }
      if (choice && atom) os << ')';
      return;
    }
    case BKind::Rec: {
      if (atom) os << '(';
      os << "rec " << p->var << " . ";
      print_behaviour(os, p->body, false);
      if (atom) os << ')';
      return;
    }
    case BKind::Var: os << p->var; return;
  }
}

// levels: 0 = seq, 1 = par, 2 = choice, 3 = prefix
inline void print_global(std::ostringstream& os, const GlobalPtr& g, int level) {
  switch (g->kind) {
    case GKind::End: os << "end"; return;
    case GKind::Var: os << g->var; return;
    case GKind::Msg: {
      os << (g->sender.is_star() ? "*" : g->sender.name) << "->" << g->receiver.name << ':'
         << g->channel.name;
      print_sort(os, g->sort);
      if (!is_end(g->cont)) {
        os << ". ";
        print_global(os, g->cont, 3);
      }
      return;
    }
    case GKind::Rec: {
      bool paren = level > 0;
      if (paren) os << '(';
      os << "rec " << g->var << " . ";
      print_global(os, g->body, 0);
      if (paren) os << ')';
      return;
    }
    case GKind::Seq: {
      bool paren = level > 0;
      if (paren) os << '(';
      print_global(os, g->left, 1);
      os << " ;; ";
      print_global(os, g->right, 0);
      if (paren) os << ')';
      return;
    }
    case GKind::Par: {
      bool paren = level > 1;
      if (paren) os << '(';
      print_global(os, g->left, 2);
      os << " | ";
      print_global(os, g->right, 1);
      if (paren) os << ')';
      return;
    }
    case GKind::Choice: {
      bool paren = level > 2;
      if (paren) os << '(';
      print_global(os, g->left, 3);
      os << " (+) ";
      print_global(os, g->right, 2);
      if (paren) os << ')';
      return;
    }
  }
}

}  // namespace detail

inline std::string print_behaviour(const BehaviourPtr& p) {
  std::ostringstream os;
  detail::print_behaviour(os, p, false);
  return os.str();
}

inline std::string print_system(const System& s) {
  std::ostringstream os;
  for (const auto& [n, p] : s.participants) {
    std::ostringstream line;
    detail::print_behaviour(line, p, false);
    os << n << " = " << line.str() << ";\n";
  }
  for (const auto& [a, q] : s.queues) {
    os << "queue " << a << " = [";
    for (size_t i = 0; i < q.size(); ++i) {
      if (i) os << ", ";
      os << q[i].name;
    }
    os << "];\n";
  }
  return os.str();
}

inline std::string print_global(const GlobalPtr& g) {
  std::ostringstream os;
  detail::print_global(os, g, 0);
  return os.str();
}

}  // namespace choreo

#endif  // CHOREO_PARSER_HPP
