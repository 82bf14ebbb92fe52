#include <string>
#include <vector>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "tracepi/security.hpp"

using namespace tracepi;
using fixtures::enc;
using fixtures::N;
using fixtures::V;

namespace {

Process snd(Term ch, Term m, Process p = Process::nil()) {
  return Process::output(std::move(ch), std::move(m), std::move(p));
}

Process when(Term l, Term r, Process then_k, Process else_k = Process::nil()) {
  return Process::match(std::move(l), std::move(r), std::move(then_k), std::move(else_k));
}

std::vector<std::string> labels(const Trace& tr) {
  std::vector<std::string> out;
  for (const auto& a : tr.actions()) out.push_back(action_to_string(a));
  return out;
}

RewriteSystem wrap_theory() {
  Signature sig;
  sig.declare("f", 1);
  return RewriteSystem(sig);
}

}  // namespace

TEST_CASE("minimal secrecy reports") {
  RewriteSystem rs = fixtures::empty_theory();
  Signature sig = rs.sig();
  Process p = when(V("x"), N("a"), snd(N("c"), N("s")), snd(N("d"), N("s")));
  Process q = when(V("x"), N("b"), snd(N("c"), N("s")), snd(N("d"), N("s")));
  Formula delta = Formula::land(Formula::neq(V("x"), N("a")), Formula::neq(V("x"), N("b")));

  PropertyReport alone = minimal_secrecy(p, "x", delta, sig, rs);
  CHECK(alone.property == "minimal-secrecy");
  CHECK(alone.variables == std::vector<std::string>{"x"});
  CHECK(alone.verdict == PropertyVerdict::Holds);
  CHECK(alone.method == "direct-logic");
  CHECK_FALSE(alone.counterexample.has_value());

  PropertyReport both = minimal_secrecy(Process::parallel({p, q}), "x", delta, sig, rs);
  CHECK(both.verdict == PropertyVerdict::Fails);
  REQUIRE(both.counterexample.has_value());
  CHECK(both.counterexample->assignment.at("x") == N("c"));
  CHECK(labels(both.counterexample->trace) ==
        std::vector<std::string>{"new #x0.out(d,#x0)", "new #x1.out(d,#x1)"});
  CHECK(both.counterexample->index == 2);

  // The triple replays: the property's inner formula fails right there.
  Formula body = Formula::implies(delta, Formula::possible(Formula::lnot(delta)));
  CHECK_FALSE(eval_modal(body, Process::parallel({p, q}), both.counterexample->assignment,
                         both.counterexample->trace, both.counterexample->index, sig, rs)
                  .value);
  CHECK(eval_modal(body, Process::parallel({p, q}), both.counterexample->assignment,
                   both.counterexample->trace, 1, sig, rs)
            .value);

  // An unsatisfiable condition is vacuously secret.
  PropertyReport vac = minimal_secrecy(p, "x", Formula::neq(N("a"), N("a")), sig, rs);
  CHECK(vac.verdict == PropertyVerdict::Holds);

  CHECK_THROWS_AS(minimal_secrecy(p, "x", Formula::future(Formula::top()), sig, rs), LogicError);
  CHECK_THROWS_AS(minimal_secrecy(p, "x", Formula::eq(V("y"), N("a")), sig, rs), LogicError);
}

TEST_CASE("minimal secrecy is not preserved by squaring") {
  RewriteSystem rs = fixtures::empty_theory();
  Signature sig = rs.sig();
  Process p = when(V("x"), N("a"),
                   Process::choice(snd(N("a"), N("s")), snd(N("b"), N("s"))),
                   snd(N("a"), N("s")));
  Process q = when(V("x"), N("b"), snd(N("b"), N("s")), snd(N("c"), N("s")));
  Process sum = Process::choice(p, q);
  Formula delta = Formula::eq(V("x"), N("a"));

  CHECK(minimal_secrecy(sum, "x", delta, sig, rs).verdict == PropertyVerdict::Holds);
  PropertyReport sq = minimal_secrecy(Process::parallel({sum, sum}), "x", delta, sig, rs);
  CHECK(sq.verdict == PropertyVerdict::Fails);
  REQUIRE(sq.counterexample.has_value());
  CHECK(sq.counterexample->assignment.at("x") == N("a"));
  CHECK(sq.counterexample->index == 2);
}

TEST_CASE("total secrecy reports") {
  RewriteSystem rs = fixtures::enc_theory();
  Signature sig = rs.sig();

  PropertyReport unused = total_secrecy(snd(N("c"), N("s")), "x", {}, sig, rs);
  CHECK(unused.property == "total-secrecy");
  CHECK(unused.method == "equivalence-characterization");
  CHECK(unused.verdict == PropertyVerdict::Holds);

  PropertyReport leak = total_secrecy(snd(N("c"), V("x")), "x", {}, sig, rs);
  CHECK(leak.verdict == PropertyVerdict::Fails);
  REQUIRE(leak.counterexample.has_value());
  CHECK(leak.counterexample->trace.length() == 1);
  CHECK_FALSE(leak.counterexample->assignment.empty());

  Process blinded = Process::restrict_name("k", snd(N("c"), enc(V("x"), N("k"))));
  PropertyReport hidden = total_secrecy(blinded, "x", {}, sig, rs);
  CHECK(hidden.verdict == PropertyVerdict::BoundedHolds);

  // Context preservation: wrapping a totally secret process keeps it so.
  PropertyReport wrapped =
      total_secrecy(Process::parallel({blinded, snd(N("d"), N("a"))}), "x", {}, sig, rs);
  CHECK(wrapped.verdict != PropertyVerdict::Fails);
  PropertyReport shadowed =
      total_secrecy(Process::restrict_name("c", blinded), "x", {}, sig, rs);
  CHECK(shadowed.verdict != PropertyVerdict::Fails);
}

TEST_CASE("role interchangeability reports") {
  RewriteSystem rs = fixtures::empty_theory();
  Signature sig = rs.sig();
  SlotFormula is_a{"z", Formula::eq(V("z"), N("a"))};
  SlotFormula is_b{"z", Formula::eq(V("z"), N("b"))};

  SUBCASE("two variables: the swap decides") {
    Process ordered = snd(N("c"), V("x1"), snd(N("c"), V("x2")));
    PropertyReport r = role_interchangeability(ordered, 0, is_a, {is_a}, sig, rs);
    CHECK(r.property == "role-interchangeability");
    CHECK(r.variables == std::vector<std::string>{"x1"});
    CHECK(r.verdict == PropertyVerdict::Fails);
    CHECK(r.method == "equivalence-characterization");
    CHECK(r.counterexample.has_value());

    Process mixed = Process::parallel({snd(N("c"), V("x1")), snd(N("c"), V("x2"))});
    PropertyReport ok = role_interchangeability(mixed, 0, is_a, {is_a}, sig, rs);
    CHECK(ok.verdict == PropertyVerdict::BoundedHolds);
    CHECK(ok.method == "equivalence-characterization");
  }

  SUBCASE("no variables: the swap is the identity") {
    PropertyReport r = role_interchangeability(snd(N("c"), N("s")), 0, is_a, {is_a}, sig, rs);
    CHECK(r.verdict == PropertyVerdict::Holds);
  }

  SUBCASE("three variables fall back to the formula") {
    Process chain = snd(N("c"), V("x1"), snd(N("c"), V("x2"), snd(N("d"), V("x3"))));

    PropertyReport trivial = role_interchangeability(chain, 0, is_a, {}, sig, rs);
    CHECK(trivial.verdict == PropertyVerdict::BoundedHolds);
    CHECK(trivial.method == "direct-logic");
    CHECK(trivial.note.find("sufficient-condition-failed") != std::string::npos);

    PropertyReport r = role_interchangeability(chain, 0, is_a, {is_b}, sig, rs);
    CHECK(r.verdict == PropertyVerdict::Fails);
    CHECK(r.method == "direct-logic");
    REQUIRE(r.counterexample.has_value());
    CHECK(r.counterexample->index >= 1);
  }

  SUBCASE("bad inputs") {
    Process mixed = Process::parallel({snd(N("c"), V("x1")), snd(N("c"), V("x2"))});
    CHECK_THROWS_AS(role_interchangeability(mixed, 5, is_a, {}, sig, rs), LogicError);
    SlotFormula modal{"z", Formula::future(Formula::top())};
    CHECK_THROWS_AS(role_interchangeability(mixed, 0, modal, {}, sig, rs), LogicError);
    SlotFormula clash{"z", Formula::eq(V("z"), V("x2"))};
    CHECK_THROWS_AS(role_interchangeability(mixed, 0, clash, {}, sig, rs), LogicError);
  }
}

TEST_CASE("openness reports") {
  RewriteSystem rs = wrap_theory();
  Signature sig = rs.sig();
  Formula delta = Formula::eq(V("x"), N("m"));

  // if x=m then out(a,n) else out(a,f(n)): the payload betrays the branch.
  Process p = when(V("x"), N("m"), snd(N("a"), N("n")),
                   snd(N("a"), Term::app("f", {N("n")})));
  PropertyReport base = openness(p, "x", delta, sig, rs);
  CHECK(base.property == "openness");
  CHECK(base.verdict == PropertyVerdict::Holds);

  // Restricting n blinds the payloads.
  PropertyReport hidden = openness(Process::restrict_name("n", p), "x", delta, sig, rs);
  CHECK(hidden.verdict == PropertyVerdict::Fails);
  REQUIRE(hidden.counterexample.has_value());
  CHECK(hidden.counterexample->assignment.at("x") == N("m"));
  CHECK(hidden.counterexample->index == 1);
  Formula body = Formula::implies(delta, Formula::knows(delta));
  CHECK_FALSE(eval_modal(body, Process::restrict_name("n", p), hidden.counterexample->assignment,
                         hidden.counterexample->trace, hidden.counterexample->index, sig, rs)
                  .value);

  // Parallel composition opens an alternative reading of the channel pair.
  Process pp = when(V("x"), N("m"), snd(N("a"), N("n")), snd(N("b"), N("n")));
  Process qq = when(V("x"), N("m"), snd(N("b"), N("n")), snd(N("a"), N("n")));
  PropertyReport left = openness(pp, "x", delta, sig, rs);
  CHECK(left.verdict == PropertyVerdict::Holds);
  PropertyReport right = openness(qq, "x", delta, sig, rs);
  CHECK(right.verdict == PropertyVerdict::Holds);
  PropertyReport pair = openness(Process::parallel({pp, qq}), "x", delta, sig, rs);
  CHECK(pair.verdict == PropertyVerdict::Fails);
  REQUIRE(pair.counterexample.has_value());
  CHECK(pair.counterexample->index == 2);

  // A valid condition is always known.
  PropertyReport valid = openness(snd(N("c"), N("s")), "x", Formula::eq(N("a"), N("a")), sig, rs);
  CHECK(valid.verdict == PropertyVerdict::Holds);

  // Replication leaves maximality uncertified.
  PropertyReport rep =
      openness(Process::replicate(snd(N("c"), N("s"))), "x", Formula::eq(N("a"), N("a")), sig, rs);
  CHECK(rep.verdict == PropertyVerdict::BoundedHolds);
  CHECK(rep.note == "maximality-bounded");
}

TEST_CASE("verdict names") {
  CHECK(property_verdict_to_string(PropertyVerdict::Holds) == "holds");
  CHECK(property_verdict_to_string(PropertyVerdict::Fails) == "fails");
  CHECK(property_verdict_to_string(PropertyVerdict::BoundedHolds) == "bounded-holds");
}
