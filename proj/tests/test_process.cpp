#include <doctest.h>

#include "support/fixtures.hpp"
#include "tracepi/process.hpp"

using namespace tracepi;
using namespace fixtures;

namespace {
Process out(Term ch, Term pay) { return Process::output(ch, pay, Process::nil()); }
}  // namespace

TEST_CASE("binder accounting tables") {
  // {M/x}: the domain variable is free, and so are the image's identifiers.
  Process sub = Process::active_subst("x", enc(N("s"), N("k")));
  CHECK(free_vars(sub) == std::set<std::string>{"x"});
  CHECK(free_names(sub) == std::set<std::string>{"s", "k"});
  CHECK(domain(sub) == std::set<std::string>{"x"});
  CHECK(bound_names(sub).empty());

  // in(c,x).out(c,x): x is input-bound, c free.
  Process p = Process::input(N("c"), "x", out(N("c"), V("x")));
  CHECK(free_vars(p).empty());
  CHECK(bound_vars(p) == std::set<std::string>{"x"});
  CHECK(restricted_vars(p).empty());
  CHECK(free_names(p) == std::set<std::string>{"c"});
  CHECK(domain(p).empty());

  // new n. out(c,n): n bound, c free.
  Process q = Process::restrict_name("n", out(N("c"), N("n")));
  CHECK(free_names(q) == std::set<std::string>{"c"});
  CHECK(bound_names(q) == std::set<std::string>{"n"});

  // new x.{M/x}: domain emptied, x restricted.
  Process r = Process::restrict_var("x", sub);
  CHECK(domain(r).empty());
  CHECK(free_vars(r).empty());
  CHECK(restricted_vars(r) == std::set<std::string>{"x"});

  // A variable restriction guarding a future alias: the domain only
  // materializes under the prefix.
  Process fut = Process::restrict_var(
      "kA", Process::input(N("d"), "z", Process::active_subst("kA", f(N("a"), V("z")))));
  CHECK(domain(fut).empty());
  CHECK(eventual_domain(Process::input(N("d"), "z",
                                       Process::active_subst("kA", f(N("a"), V("z"))))) ==
        std::set<std::string>{"kA"});
  CHECK(free_vars(fut).empty());
}

TEST_CASE("closedness") {
  // {a/x} is closed: fv = dom = {x}.
  CHECK(is_closed(Process::active_subst("x", N("a"))));
  // out(c,x) alone is open.
  CHECK_FALSE(is_closed(out(N("c"), V("x"))));
  // {a/x} | out(c,x) is closed.
  CHECK(is_closed(Process::parallel({Process::active_subst("x", N("a")), out(N("c"), V("x"))})));
}

TEST_CASE("substitution avoids capture by name binders") {
  FreshSource fs;
  // (new n. out(c, x)){n/x}: the bound n must be renamed before n is
  // injected for x.
  Process p = Process::restrict_name("n", out(N("c"), V("x")));
  Process q = substitute(p, {{"x", N("n")}}, fs);
  REQUIRE(q.kind() == Process::Kind::RestrictName);
  CHECK(q.binder() != "n");
  CHECK(q.child(0).rhs() == N("n"));  // the free n we substituted in
  CHECK(free_names(q) == std::set<std::string>{"c", "n"});
}

TEST_CASE("substitution avoids capture by input binders") {
  FreshSource fs;
  // (in(c,y). out(c, pair-of x,y)){y/x}: input binder y must move aside.
  Process p = Process::input(N("c"), "y", out(N("c"), enc(V("x"), V("y"))));
  Process q = substitute(p, {{"x", V("y")}}, fs);
  REQUIRE(q.kind() == Process::Kind::Input);
  CHECK(q.binder() != "y");
  auto payload = q.child(0).rhs();
  CHECK(payload.args()[0] == V("y"));         // substituted-in free y
  CHECK(payload.args()[1] == V(q.binder()));  // renamed binder
}

TEST_CASE("substitution under shadowing binder stops") {
  FreshSource fs;
  Process p = Process::input(N("c"), "x", out(N("c"), V("x")));
  Process q = substitute(p, {{"x", N("a")}}, fs);
  CHECK(q == p);  // the free x does not occur; binder shadows
}

TEST_CASE("substituting a substitution's domain variable") {
  FreshSource fs;
  Process p = Process::active_subst("x", N("a"));
  Process q = substitute(p, {{"x", V("y")}}, fs);
  CHECK(q == Process::active_subst("y", N("a")));
  CHECK_THROWS_AS(substitute(p, {{"x", N("a")}}, fs), ProcessError);
}

TEST_CASE("alpha_fresh separates clashing binders and keeps distinct ones") {
  FreshSource fs;
  Process p = Process::parallel({
      Process::restrict_name("n", out(N("c"), N("n"))),
      Process::restrict_name("n", out(N("d"), N("n"))),
  });
  Process q = alpha_fresh(p, {}, {}, fs);
  const auto& l = q.child(0);
  const auto& r = q.child(1);
  CHECK(l.binder() != r.binder());
  CHECK(l.child(0).rhs() == Term::name(l.binder()));
  CHECK(r.child(0).rhs() == Term::name(r.binder()));
  // A binder with no clash keeps its spelling.
  CHECK((l.binder() == "n" || r.binder() == "n"));

  // Avoid sets are honoured.
  Process q2 = alpha_fresh(Process::restrict_name("m", out(N("c"), N("m"))), {"m"}, {}, fs);
  CHECK(q2.binder() != "m");
}

TEST_CASE("well-formedness diagnostics") {
  // Domain clash in a composition.
  Process clash = Process::parallel(
      {Process::active_subst("x", N("a")), Process::active_subst("x", N("b"))});
  auto w = well_formed(clash);
  CHECK_FALSE(w.ok);
  CHECK(w.issue.find("DomainClash") == 0);

  // Cyclic substitutions: {y/x} | {x/y}.
  Process cyc = Process::parallel(
      {Process::active_subst("x", V("y")), Process::active_subst("y", V("x"))});
  w = well_formed(cyc);
  CHECK_FALSE(w.ok);
  CHECK(w.issue.find("Cyclic") == 0);

  // Restriction of a variable that never enters the domain.
  Process bad = Process::restrict_var("z", out(N("c"), V("z")));
  w = well_formed(bad);
  CHECK_FALSE(w.ok);
  CHECK(w.issue.find("RestrictNonDomainVar") == 0);

  // Chained but acyclic substitutions are fine: {n/x} | {x/y}.
  Process ok = Process::parallel(
      {Process::active_subst("x", N("n")), Process::active_subst("y", V("x"))});
  CHECK(well_formed(ok).ok);

  // The paper's future-domain restriction is accepted.
  Process fut = Process::restrict_var(
      "kA", Process::input(N("d"), "z", Process::active_subst("kA", f(N("a"), V("z")))));
  CHECK(well_formed(fut).ok);
}

TEST_CASE("printing round-trips the grammar shapes") {
  Process p = Process::parallel({
      Process::restrict_name(
          "k", Process::output(N("c"), enc(N("s"), N("k")),
                               Process::input(N("c"), "x", Process::nil()))),
      Process::choice(out(N("a"), N("s")), out(N("b"), N("s"))),
  });
  CHECK(process_to_string(p) ==
        "new k.out(c,enc(s,k)).in(c,x) | out(a,s) + out(b,s)");
  CHECK(process_to_string(Process::active_subst("x", N("a"))) == "{a/x}");
  CHECK(process_to_string(Process::replicate(out(N("c"), N("a")))) == "!(out(c,a))");
}
