from django.test import SimpleTestCase

from ..engine import ExecutionContext
from ..reader import read_term
from ..reflect import context_module, predicate_properties, strip_module
from ..writer import term_to_text
from .support import load_fixtures, load_text, masked, multiset, solve


class StripModuleTest(SimpleTestCase):
    """Tests for strip_module/3."""

    def test_unqualified_goal_uses_calling_context(self):
        """Test an unqualified goal reports the calling context."""
        ctx = ExecutionContext("client", "library", "library")
        module, plain = strip_module(read_term("me(X)"), ctx)
        self.assertEqual(module, "client")
        self.assertEqual(masked(term_to_text(plain)), "me(_G)")

    def test_innermost_qualifier_wins(self):
        """Test nested qualifiers reduce to the innermost one."""
        solutions, _ = solve(load_text("").db, "strip_module(a:b:g(x), M, G)")
        self.assertEqual(solutions, [{"M": "b", "G": "g(x)"}])
        solutions, _ = solve(load_text("").db, "strip_module(g, M, G)")
        self.assertEqual(solutions, [{"M": "user", "G": "g"}])

    def test_caller_through_meta_argument(self):
        """Test a meta-predicate recovers its caller from the qualified argument."""
        db = load_fixtures("strip_module.pl").db
        self.assertEqual(solve(db, "mp(true, C)")[0], [{"C": "user"}])
        self.assertEqual(solve(db, "mp(fail, C)")[0], [])
        self.assertEqual(solve(db, "m:mp(true, C)", "calling")[0], [{"C": "m"}])
        self.assertEqual(solve(db, "m:mp(true, C)", "lookup")[0], [{"C": "user"}])

    def test_qualifier_pattern(self):
        """Test matching Caller:_ against the meta-argument gives the same answers."""
        db = load_fixtures("qualifier_pattern.pl").db
        self.assertEqual(solve(db, "mp(true, C)")[0], [{"C": "user"}])
        self.assertEqual(solve(db, "m:mp(true, C)", "calling")[0], [{"C": "m"}])
        self.assertEqual(solve(db, "m:mp(true, C)", "lookup")[0], [{"C": "user"}])


class ToolTest(SimpleTestCase):
    """Tests for tool/2 predicates."""

    def test_true_caller_is_appended(self):
        """Test the implementation receives the module the call came from."""
        db = load_fixtures("tool.pl").db
        for semantics in ("calling", "lookup"):
            with self.subTest(semantics=semantics):
                self.assertEqual(solve(db, "mp(true, C)", semantics)[0], [{"C": "user"}])
                self.assertEqual(solve(db, "m:mp(true, C)", semantics)[0], [{"C": "user"}])

    def test_tool_from_another_module(self):
        """Test a client module is reported as the caller."""
        db = load_fixtures("tool.pl", texts=[(":- module(c, [go/1]).\n:- use_module(m, [mp/2]).\ngo(C) :- mp(true, C).", "c.pl")]).db
        self.assertEqual(solve(db, "c:go(C)")[0], [{"C": "c"}])


class ContextModuleTest(SimpleTestCase):
    """Tests for context_module/1."""

    def test_top_level(self):
        """Test the top level runs in user."""
        self.assertEqual(solve(load_text("").db, "context_module(M)")[0], [{"M": "user"}])
        self.assertEqual(context_module(ExecutionContext.top()), "user")

    def test_ordinary_clause(self):
        """Test a clause body runs in the module of its definition."""
        db = load_text(":- module(cm, [where/1]).\nwhere(M) :- context_module(M).", name="cm.pl").db
        self.assertEqual(solve(db, "where(M)")[0], [{"M": "cm"}])

    def test_transparent_predicate(self):
        """Test a transparent predicate inherits the calling context."""
        db = load_fixtures("transparent.pl").db
        self.assertEqual(solve(db, "whoami(M)")[0], [{"M": "user"}])
        self.assertEqual(solve(db, "t:whoami(M)", "calling")[0], [{"M": "t"}])
        self.assertEqual(solve(db, "t:whoami(M)", "lookup")[0], [{"M": "user"}])
        self.assertEqual(solve(db, "run(whoami(X), M)")[0], [{"X": "user", "M": "user"}])


class PredicatePropertyTest(SimpleTestCase):
    """Tests for predicate_property/2."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.db = load_fixtures("library.pl", "client.pl", "transparent.pl", "tool.pl").db

    def properties(self, module, name, arity):
        return [term_to_text(p) for p in predicate_properties(self.db, module, (name, arity))]

    def test_imported_meta_predicate(self):
        """Test the properties of an imported meta-predicate."""
        self.assertEqual(
            self.properties("client", "my_call", 1),
            [
                "defined",
                "static",
                "meta_predicate(my_call(0))",
                "exported",
                "imported_from(library)",
                "number_of_clauses(1)",
            ],
        )

    def test_builtin(self):
        """Test builtins report their template."""
        self.assertEqual(
            self.properties("user", "findall", 3),
            ["built_in", "defined", "static", "meta_predicate(findall(?,0,-))"],
        )

    def test_unknown_predicate(self):
        """Test an invisible predicate has no properties."""
        self.assertEqual(self.properties("client", "nothing", 0), [])
        self.assertEqual(self.properties("nowhere", "me", 1), [])

    def test_query_interface(self):
        """Test predicate_property/2 from a query."""
        self.assertEqual(solve(self.db, "predicate_property(library:my_call(_), meta_predicate(T))")[0], [{"T": "my_call(0)"}])
        self.assertEqual(solve(self.db, "predicate_property(client:my_call(_), imported_from(M))")[0], [{"M": "library"}])
        self.assertEqual(solve(self.db, "predicate_property(findall(_, _, _), built_in)")[0], [{}])
        self.assertEqual(solve(self.db, "predicate_property(library:me(_), exported)")[0], [])
        self.assertEqual(solve(self.db, "predicate_property(t:whoami(_), transparent)")[0], [{}])
        self.assertEqual(solve(self.db, "predicate_property(m:mp(_, _), tool(I))")[0], [{"I": "mp/3"}])

    def test_enumeration(self):
        """Test an unbound head enumerates the visible predicates."""
        solutions, _ = solve(self.db, "predicate_property(client:P, exported)")
        self.assertEqual(multiset(solutions), multiset([{"P": "test(_1)"}, {"P": "my_call(_2)"}]))
