#include <doctest.h>

#include "support/fixtures.hpp"
#include "support/gen.hpp"
#include "tracepi/structural.hpp"

using namespace tracepi;
using namespace fixtures;

namespace {
Process out(Term ch, Term pay) { return Process::output(ch, pay, Process::nil()); }
Process sub(const std::string& x, Term img) { return Process::active_subst(x, img); }
}  // namespace

TEST_CASE("cycle-free ordering") {
  // {n/x} | {x/y}: admissible as [y,x] (x's image avoids both).
  std::vector<std::pair<std::string, Term>> bs = {{"x", N("n")}, {"y", V("x")}};
  auto ord = cycle_free_order(bs);
  REQUIRE(ord.has_value());
  // {y/x} | {x/y}: cyclic.
  std::vector<std::pair<std::string, Term>> cyc = {{"x", V("y")}, {"y", V("x")}};
  CHECK_FALSE(cycle_free_order(cyc).has_value());
  // self-cycle
  std::vector<std::pair<std::string, Term>> self = {{"x", enc(V("x"), N("k"))}};
  CHECK_FALSE(cycle_free_order(self).has_value());
}

TEST_CASE("uplus: worked example") {
  // {n/x} joined with {x/y} applies through: both map to n.
  auto r = uplus({{"x", N("n")}}, {{"y", V("x")}});
  CHECK(r.at("x") == N("n"));
  CHECK(r.at("y") == N("n"));

  CHECK_THROWS_AS(uplus({{"x", N("n")}}, {{"x", N("m")}}), ProcessError);
  CHECK_THROWS_AS(uplus({{"x", V("y")}}, {{"y", V("x")}}), ProcessError);
}

TEST_CASE("pnf: worked examples") {
  // new n.({n/x} | out(c,x)) => nu n. ({n/x} | out(c,n)).
  Process a = Process::restrict_name(
      "n", Process::parallel({sub("x", N("n")), out(N("c"), V("x"))}));
  auto r = pnf(a);
  REQUIRE(r.names.size() == 1);
  CHECK(r.rvars.empty());
  CHECK(r.subst.at("x") == Term::name(r.names[0]));
  CHECK(r.plain == out(N("c"), Term::name(r.names[0])));

  // new x.({M/x} | out(c,x)): the restricted alias is applied through and
  // dropped; no substitution remains.
  Process b = Process::restrict_var(
      "x", Process::parallel({sub("x", N("m")), out(N("c"), V("x"))}));
  auto rb = pnf(b);
  CHECK(rb.subst.empty());
  CHECK(rb.rvars.empty());
  CHECK(rb.plain == out(N("c"), N("m")));

  // Chained substitutions resolve fully.
  Process c = Process::parallel({sub("x", N("n")), sub("y", V("x")), out(N("c"), V("y"))});
  auto rc = pnf(c);
  CHECK(rc.subst.at("y") == N("n"));
  CHECK(rc.plain == out(N("c"), N("n")));

  // A future-domain variable restriction survives as an rvar.
  Process d = Process::restrict_var(
      "kA", Process::input(N("d"), "z", Process::active_subst("kA", f(N("a"), V("z")))));
  auto rd = pnf(d);
  CHECK(rd.rvars == std::vector<std::string>{"kA"});
  CHECK(rd.subst.empty());
}

TEST_CASE("pnf result is reassemblable") {
  Process a = Process::restrict_name(
      "k", Process::parallel({sub("x", enc(N("s"), N("k"))), out(N("c"), V("x"))}));
  auto r = pnf(a);
  Process b = r.to_process();
  auto rs = enc_theory();
  CHECK(struct_equiv(a, b, rs));
}

TEST_CASE("canonical form identifies the monoid laws") {
  auto rs = empty_theory();
  Process p = out(N("c"), N("a"));
  Process q = out(N("d"), N("b"));

  // A | 0 == A
  CHECK(struct_equiv(Process::parallel({p, Process::nil()}), p, rs));
  // commutativity and associativity of parallel
  CHECK(struct_equiv(Process::parallel({p, q}), Process::parallel({q, p}), rs));
  CHECK(struct_equiv(Process::parallel({Process::parallel({p, q}), out(N("e"), N("a"))}),
                     Process::parallel({p, Process::parallel({q, out(N("e"), N("a"))})}), rs));
  // sum commutativity at an exposed position
  CHECK(struct_equiv(Process::choice(p, q), Process::choice(q, p), rs));
  // restriction exchange
  Process r1 = Process::restrict_name("n", Process::restrict_name("m", out(N("n"), N("m"))));
  Process r2 = Process::restrict_name("m", Process::restrict_name("n", out(N("m"), N("n"))));
  CHECK(struct_equiv(r1, r2, rs));
  // alpha-variants
  Process a1 = Process::restrict_name("n", out(N("c"), N("n")));
  Process a2 = Process::restrict_name("m", out(N("c"), N("m")));
  CHECK(struct_equiv(a1, a2, rs));
}

TEST_CASE("canonical form is scope-aware") {
  auto rs = empty_theory();
  Process p = out(N("c"), N("a"));
  // new n.(A|B) == (new n.A)|B when n not free in B
  Process lhs = Process::restrict_name("n", Process::parallel({out(N("c"), N("n")), p}));
  Process rhs = Process::parallel({Process::restrict_name("n", out(N("c"), N("n"))), p});
  CHECK(struct_equiv(lhs, rhs, rs));
  // but floating out does not capture: nu n.out(c,n) vs out(c,n) differ
  CHECK_FALSE(struct_equiv(Process::restrict_name("n", out(N("c"), N("n"))),
                           out(N("c"), N("n")), rs));
}

TEST_CASE("alias axioms") {
  auto rs = enc_theory();
  // nu x.{M/x} == 0
  CHECK(struct_equiv(Process::restrict_var("x", sub("x", N("m"))), Process::nil(), rs));
  // A | {M/x} == A{M/x} | {M/x}
  Process lhs = Process::parallel({out(N("c"), V("x")), sub("x", N("a"))});
  Process rhs = Process::parallel({out(N("c"), N("a")), sub("x", N("a"))});
  CHECK(struct_equiv(lhs, rhs, rs));
  // {M/x} == {N/x} when the theory equates M and N
  CHECK(struct_equiv(sub("x", dec(enc(N("a"), N("k")), N("k"))), sub("x", N("a")), rs));
}

TEST_CASE("canonicalization does not rewrite under prefixes") {
  auto rs = empty_theory();
  // out(c,a).(P|0) is NOT structurally equivalent to out(c,a).P: the
  // equivalence only acts at evaluation-context positions.
  Process inner1 = Process::output(N("c"), N("a"),
                                   Process::parallel({out(N("d"), N("b")), Process::nil()}));
  Process inner2 = Process::output(N("c"), N("a"), out(N("d"), N("b")));
  CHECK_FALSE(struct_equiv(inner1, inner2, rs));
  // Replication is never unfolded by the canonicalizer.
  Process bang = Process::replicate(out(N("c"), N("a")));
  Process unfolded = Process::parallel({out(N("c"), N("a")), bang});
  CHECK_FALSE(struct_equiv(bang, unfolded, rs));
}

TEST_CASE("canonical form on shared bound names") {
  auto rs = empty_theory();
  Process a = Process::restrict_name(
      "n", Process::restrict_name(
               "m", Process::parallel({out(N("c"), N("n")), out(N("d"), N("m"))})));
  Process b = Process::restrict_name(
      "m", Process::restrict_name(
               "n", Process::parallel({out(N("d"), N("n")), out(N("c"), N("m"))})));
  CHECK(struct_equiv(a, b, rs));

  // Same skeleton but different sharing pattern stays distinct.
  Process c1 = Process::restrict_name(
      "n", Process::parallel({out(N("c"), N("n")), out(N("d"), N("n"))}));
  Process c2 = Process::restrict_name(
      "n", Process::restrict_name(
               "m", Process::parallel({out(N("c"), N("n")), out(N("d"), N("m"))})));
  CHECK_FALSE(struct_equiv(c1, c2, rs));
}

TEST_CASE("canonical equality is an equivalence on random processes") {
  gen::Rng rng(5150);
  gen::ProcessGen pg;
  auto rs = enc_theory();
  for (int i = 0; i < 200; ++i) {
    Process p = pg.run(rng, 8);
    Process c1 = canonical_process(p, rs);
    // stability: canonicalizing the canonical form is the identity
    Process c2 = canonical_process(c1, rs);
    CHECK(c1 == c2);
    // reassembly stays equivalent
    CHECK(struct_equiv(p, c1, rs));
  }
}
