#pragma once

// Shared theories and term shorthands for the test suites.

#include <string>
#include <vector>

#include "tracepi/term.hpp"

namespace fixtures {

using tracepi::RewriteSystem;
using tracepi::Signature;
using tracepi::Term;

// Symmetric encryption: dec(enc(X,K),K) -> X.
inline RewriteSystem enc_theory() {
  Signature sig;
  sig.declare("enc", 2);
  sig.declare("dec", 2);
  RewriteSystem rs(sig);
  Term X = Term::var("X"), K = Term::var("K");
  rs.add_rule(Term::app("dec", {Term::app("enc", {X, K}), K}), X);
  return rs;
}

// Symmetric encryption plus a pairing destructor pair.
inline RewriteSystem enc_pair_theory() {
  Signature sig;
  sig.declare("enc", 2);
  sig.declare("dec", 2);
  sig.declare("pair", 2);
  sig.declare("fst", 1);
  sig.declare("snd", 1);
  RewriteSystem rs(sig);
  Term X = Term::var("X"), Y = Term::var("Y"), K = Term::var("K");
  rs.add_rule(Term::app("dec", {Term::app("enc", {X, K}), K}), X);
  rs.add_rule(Term::app("fst", {Term::app("pair", {X, Y})}), X);
  rs.add_rule(Term::app("snd", {Term::app("pair", {X, Y})}), Y);
  return rs;
}

// Diffie-Hellman: f(x, g(y)) = f(y, g(x)) as a commutation hook.
inline RewriteSystem dh_theory() {
  Signature sig;
  sig.declare("f", 2);
  sig.declare("g", 1);
  RewriteSystem rs(sig);
  rs.add_commutation("f", "g");
  return rs;
}

inline RewriteSystem empty_theory() { return RewriteSystem(Signature{}); }

inline Term N(const std::string& s) { return Term::name(s); }
inline Term V(const std::string& s) { return Term::var(s); }
inline Term enc(Term a, Term b) { return Term::app("enc", {std::move(a), std::move(b)}); }
inline Term dec(Term a, Term b) { return Term::app("dec", {std::move(a), std::move(b)}); }
inline Term f(Term a, Term b) { return Term::app("f", {std::move(a), std::move(b)}); }
inline Term g(Term a) { return Term::app("g", {std::move(a)}); }

}  // namespace fixtures
