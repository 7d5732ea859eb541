import io
import random

from django.test import SimpleTestCase

from ..engine import Bindings, Engine, ExecutionContext, run_query, unify
from ..exceptions import PrologError
from ..moduledb import ModuleDatabase
from ..reader import read_term
from ..specializer import UNIV_SOURCE
from ..terms import Compound, Var
from ..writer import term_to_text
from .support import load_fixtures, load_text, masked, multiset, options, solve

CLIENT_PROGRAMS = {
    "v1": ("library.pl", "client.pl"),
    "v2": ("library.pl", "client_v2.pl"),
    "v3": ("library.pl", "client_v3.pl"),
}

LEAVES = [
    "id(X)",
    "id(Y)",
    "two(X)",
    "two(Y)",
    "id(m1)",
    "id(user)",
    "true",
    "fail",
    "X = Y",
    "m1:id(Y)",
    "m2:two(X)",
]


def formal_text(error):
    return term_to_text(error.formal)


def outcome(db, goal, semantics):
    """Решения (мультимножество) и вывод запроса, либо текст брошенной ошибки."""
    try:
        solutions, output = solve(db, goal, semantics)
    except PrologError as error:
        return ("error", masked(term_to_text(error.ball))), ""
    return multiset(solutions), masked(output)


def control_tree(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return ("leaf", rng.choice(LEAVES))
    kind = rng.choice(["and", "or", "if", "ite"])
    arity = 3 if kind == "ite" else 2
    return (kind,) + tuple(control_tree(rng, depth - 1) for _ in range(arity))


def render(tree, module=None):
    """Текст цели; с module квалификатор приписан к каждой неквалифицированной листовой цели."""
    kind = tree[0]
    if kind == "leaf":
        text = tree[1]
        if module is None or ":" in text:
            return text
        return f"{module}:({text})"
    parts = [render(part, module) for part in tree[1:]]
    if kind == "and":
        return f"({parts[0]}, {parts[1]})"
    if kind == "or":
        return f"({parts[0]} ; {parts[1]})"
    if kind == "if":
        return f"({parts[0]} -> {parts[1]})"
    return f"({parts[0]} -> {parts[1]} ; {parts[2]})"


class UnifyTest(SimpleTestCase):
    """Tests for unification and the binding trail."""

    def test_most_general_unifier(self):
        """Test unification binds variables on both sides."""
        bindings = Bindings()
        left, right = read_term("f(X, b)"), read_term("f(a, Y)")
        self.assertTrue(unify(left, right, bindings))
        self.assertEqual(term_to_text(bindings.resolve(left)), "f(a,b)")
        self.assertEqual(bindings.resolve(left), bindings.resolve(right))

    def test_clash(self):
        """Test different functors do not unify."""
        self.assertFalse(unify(read_term("f(a)"), read_term("g(a)"), Bindings()))
        self.assertFalse(unify(read_term("f(a)"), read_term("f(a, b)"), Bindings()))

    def test_occurs_check(self):
        """Test the occurs check rejects cyclic bindings only when enabled."""
        var = Var("X", 1)
        cyclic = Compound("f", (var,))
        self.assertFalse(unify(var, cyclic, Bindings(), occurs_check=True))
        self.assertTrue(unify(var, cyclic, Bindings()))

    def test_undo(self):
        """Test undo() restores the substitution to a mark."""
        bindings = Bindings()
        var = Var("X", 1)
        mark = bindings.mark()
        unify(var, read_term("a"), bindings)
        bindings.undo(mark)
        self.assertIs(bindings.deref(var), var)


class ContextTransitionTest(SimpleTestCase):
    """Tests for calling-context transitions on the library and client programs."""

    def test_top_level_context(self):
        """Test queries start in user for all three modules."""
        self.assertEqual(ExecutionContext.top(), ExecutionContext("user", "user", "user"))

    def test_imported_meta_predicate(self):
        """Test the meta-argument is qualified with the importing module."""
        db = load_fixtures(*CLIENT_PROGRAMS["v1"]).db
        for semantics in ("calling", "lookup"):
            with self.subTest(semantics=semantics):
                solutions, output = solve(db, "client:test(Me)", semantics)
                self.assertEqual(solutions, [{"Me": "client"}])
                self.assertEqual(masked(output), "Calling: client:me(_G)\n")

    def test_qualified_call_under_calling_semantics(self):
        """Test library:my_call/1 makes library the calling context."""
        db = load_fixtures(*CLIENT_PROGRAMS["v2"]).db
        solutions, output = solve(db, "client:test(Me)", "calling")
        self.assertEqual(solutions, [{"Me": "library"}])
        self.assertEqual(masked(output), "Calling: library:me(_G)\n")

    def test_qualified_call_under_lookup_semantics(self):
        """Test library:my_call/1 keeps client as the calling context."""
        db = load_fixtures(*CLIENT_PROGRAMS["v2"]).db
        solutions, output = solve(db, "client:test(Me)", "lookup")
        self.assertEqual(solutions, [{"Me": "client"}])
        self.assertEqual(masked(output), "Calling: client:me(_G)\n")

    def test_explicitly_qualified_meta_argument(self):
        """Test an explicit qualifier on the meta-argument wins under both semantics."""
        db = load_fixtures(*CLIENT_PROGRAMS["v3"]).db
        for semantics in ("calling", "lookup"):
            with self.subTest(semantics=semantics):
                solutions, output = solve(db, "client:test(Me)", semantics)
                self.assertEqual(solutions, [{"Me": "client"}])
                self.assertEqual(masked(output), "Calling: client:me(_G)\n")

    def test_unqualified_query_through_user_import(self):
        """Test user sees exported predicates of loaded modules."""
        db = load_fixtures(*CLIENT_PROGRAMS["v1"]).db
        solutions, _ = solve(db, "test(Me)")
        self.assertEqual(solutions, [{"Me": "client"}])

    def test_late_binding(self):
        """Test a call to an unknown module fails only when executed."""
        db = load_fixtures("fictitious.pl").db
        with self.assertRaises(PrologError) as cm:
            solve(db, "client:test(x)")
        self.assertEqual(formal_text(cm.exception), "existence_error(procedure,fictitious:predicate/1)")

    def test_meta_call_counter(self):
        """Test meta-calls are counted per query."""
        db = load_fixtures(*CLIENT_PROGRAMS["v1"]).db
        _, engine = run_query(db, "client:test(Me)", options(), io.StringIO())
        self.assertEqual(engine.meta_calls, 2)
        _, engine = run_query(db, "library:my_call(true)", options(), io.StringIO())
        self.assertEqual(engine.meta_calls, 2)
        _, engine = run_query(db, "X = a", options(), io.StringIO())
        self.assertEqual(engine.meta_calls, 0)

    def test_solutions_are_lazy(self):
        """Test solve() yields one solution at a time."""
        db = load_text("n(1).\nn(2).\nn(3).").db
        engine = Engine(db, options(), io.StringIO())
        solutions = engine.query("n(X)")
        self.assertEqual(next(solutions).lines(), ["X = 1"])
        self.assertEqual(next(solutions).lines(), ["X = 2"])
        solutions.close()


class ControlPropagationTest(SimpleTestCase):
    """Tests for qualified control constructs."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.db = load_fixtures("probes.pl", "probes2.pl", texts=[("id(user).\ntwo(ua).\ntwo(ub).\n", "<user>")]).db

    def test_conjunction_under_both_semantics(self):
        """Test the conjuncts of M:(A, B) run in M or in the caller."""
        calling, _ = solve(self.db, "m1:(id(X), id(Y))", "calling")
        lookup, _ = solve(self.db, "m1:(id(X), id(Y))", "lookup")
        self.assertEqual(calling, [{"X": "m1", "Y": "m1"}])
        self.assertEqual(lookup, [{"X": "user", "Y": "user"}])

    def test_plain_qualified_goal_under_lookup(self):
        """Test a qualified non-control goal is looked up in its qualifier."""
        solutions, _ = solve(self.db, "m1:id(X)", "lookup")
        self.assertEqual(solutions, [{"X": "m1"}])

    def test_random_control_trees(self):
        """Test M:G against its distributed form on random control trees."""
        rng = random.Random(20240611)
        checked = 0
        for _ in range(110):
            tree = control_tree(rng, 3)
            plain = render(tree)
            for module in ("m1", "m2"):
                goal = f"{module}:({plain})"
                with self.subTest(goal=goal, semantics="calling"):
                    self.assertEqual(
                        outcome(self.db, goal, "calling"),
                        outcome(self.db, render(tree, module), "calling"),
                    )
                with self.subTest(goal=goal, semantics="lookup"):
                    self.assertEqual(outcome(self.db, goal, "lookup"), outcome(self.db, plain, "lookup"))
                checked += 1
        self.assertGreaterEqual(checked, 200)


class ControlConstructTest(SimpleTestCase):
    """Tests for cut, if-then-else, negation and catch/throw."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.db = load_text(
            "p(1).\np(2).\np(3).\n"
            "first(X) :- p(X), !.\n"
            "guess(X) :- ( p(X) -> true ; X = none ).\n"
            "loop :- loop.\n"
            "cut_in_call(X) :- call((p(X), !)).\n"
            "cut_in_call(4).\n"
        ).db

    def test_cut(self):
        """Test cut commits to the first solution."""
        self.assertEqual(solve(self.db, "first(X)")[0], [{"X": "1"}])

    def test_cut_is_local_to_call(self):
        """Test cut inside call/1 does not cut the calling clause."""
        self.assertEqual(solve(self.db, "cut_in_call(X)")[0], [{"X": "1"}, {"X": "4"}])

    def test_if_then_else(self):
        """Test the condition of if-then-else is proved once."""
        self.assertEqual(solve(self.db, "guess(X)")[0], [{"X": "1"}])
        self.assertEqual(solve(self.db, "( fail -> X = a ; X = b )")[0], [{"X": "b"}])
        self.assertEqual(solve(self.db, "( fail -> X = a )")[0], [])

    def test_negation(self):
        """Test negation as failure."""
        self.assertEqual(solve(self.db, "\\+ p(4)")[0], [{}])
        self.assertEqual(solve(self.db, "\\+ p(1)")[0], [])

    def test_catch_and_throw(self):
        """Test a thrown ball unifies with the catcher."""
        self.assertEqual(solve(self.db, "catch(throw(oops), E, true)")[0], [{"E": "oops"}])
        self.assertEqual(solve(self.db, "catch(p(X), _, true)")[0], [{"X": "1"}, {"X": "2"}, {"X": "3"}])
        with self.assertRaises(PrologError) as cm:
            solve(self.db, "catch(throw(oops), other, true)")
        self.assertEqual(term_to_text(cm.exception.ball), "oops")

    def test_catch_builtin_errors(self):
        """Test builtin errors are catchable error/2 terms."""
        solutions, _ = solve(self.db, "catch(call(_), error(E, _), true)")
        self.assertEqual(solutions, [{"E": "instantiation_error"}])
        solutions, _ = solve(self.db, "catch(call(1), error(E, _), true)")
        self.assertEqual(solutions, [{"E": "type_error(callable,1)"}])

    def test_occurs_check_option(self):
        """Test X = f(X) fails with the occurs check enabled."""
        self.assertEqual(solve(self.db, "X = f(X)", occurs_check=True)[0], [])

    def test_max_depth(self):
        """Test runaway recursion stops at the depth limit."""
        with self.assertRaises(PrologError) as cm:
            solve(self.db, "loop", max_depth=50)
        self.assertEqual(formal_text(cm.exception), "resource_error(depth)")

    def test_max_solutions(self):
        """Test the query stops after the requested number of solutions."""
        self.assertEqual(solve(self.db, "p(X)", max_solutions=2)[0], [{"X": "1"}, {"X": "2"}])

    def test_unknown_procedure(self):
        """Test calling an undefined predicate raises an existence error."""
        with self.assertRaises(PrologError) as cm:
            solve(self.db, "q(1)")
        self.assertEqual(formal_text(cm.exception), "existence_error(procedure,user:q/1)")

    def test_import_cycle_at_call_time(self):
        """Test an import cycle reached by a call is an existence error."""
        db = ModuleDatabase()
        db.declare_module("a", [("p", 0)])
        db.declare_module("b", [("p", 0)])
        db.register_import("a", "b", [("p", 0)])
        db.register_import("b", "a", [("p", 0)])
        with self.assertLogs("prolog.engine", "ERROR"), self.assertRaises(PrologError) as cm:
            solve(db, "a:p")
        self.assertEqual(formal_text(cm.exception), "existence_error(procedure,a:p/0)")


class CallNTest(SimpleTestCase):
    """Tests for call/N."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.db = load_fixtures("closures.pl", "calln.pl", texts=[(UNIV_SOURCE, "<univ>")]).db

    def test_closure_arguments_are_appended(self):
        """Test call/N appends its extra arguments to the closure."""
        solutions, _ = solve(self.db, "call(add(1), 2, S)")
        self.assertEqual(solutions, [{"S": "sum(1,2)"}])

    def test_max_call_n(self):
        """Test call/N beyond the configured maximum is a representation error."""
        with self.assertRaises(PrologError) as cm:
            solve(self.db, "call(w, 1, 2, 3, 4, 5, 6, 7, 8)", max_call_n=8)
        self.assertEqual(formal_text(cm.exception), "representation_error(max_call_n_exceeded)")

    def test_beyond_portable_ceiling(self):
        """Test call/12 works with the default maximum."""
        solutions, _ = solve(self.db, "call(wide, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11)")
        self.assertEqual(solutions, [{}])

    def test_qualified_closure(self):
        """Test a qualified closure keeps its qualifier."""
        solutions, _ = solve(self.db, "call(closures:small, X)")
        self.assertEqual(solutions, [{"X": "1"}, {"X": "2"}])

    def test_call_n_matches_univ(self):
        """Test call/N against the =.. construction on random closures."""
        rng = random.Random(7)
        domains = [["a", "b", "c"], ["1", "2", "3"], ["x", "y", "z"]]
        checked = 0
        for _ in range(120):
            arity = rng.randint(1, 3)
            args = [rng.choice(domains[i]) if rng.random() < 0.5 else f"V{i}" for i in range(arity)]
            fixed = rng.randint(0, arity - 1)
            closure = "rel" if fixed == 0 else f"rel({', '.join(args[:fixed])})"
            extra = ", ".join(args[fixed:])
            direct = multiset(solve(self.db, f"rel({', '.join(args)})")[0])
            with self.subTest(closure=closure, extra=extra):
                self.assertEqual(multiset(solve(self.db, f"call({closure}, {extra})")[0]), direct)
                self.assertEqual(multiset(solve(self.db, f"'$univ_call'({closure}, [{extra}])")[0]), direct)
            checked += 1
        self.assertGreaterEqual(checked, 100)


class BuiltinEquivalenceTest(SimpleTestCase):
    """Tests for qualified calls to meta builtins."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.db = load_text(":- module(m, []).\ng(1).\ng(2).\n", name="m.pl").db

    def test_qualified_findall(self):
        """Test M:findall/3 qualifies the goal with M."""
        expected = solve(self.db, "findall(T, m:g(T), L)")[0]
        self.assertEqual(multiset(solve(self.db, "m:findall(T, g(T), L)")[0]), multiset(expected))
        self.assertEqual(expected[0]["L"], "[1,2]")

    def test_qualified_forall(self):
        """Test M:forall/2 runs both goals in M."""
        self.assertEqual(len(solve(self.db, "m:forall(g(X), g(X))")[0]), 1)

    def test_qualified_assertz(self):
        """Test M:assertz/1 adds the clause to M."""
        solve(self.db, "m:assertz(f(1))")
        self.assertEqual(len(self.db.predicate("m", ("f", 1)).clauses), 1)
        with self.assertLogs("prolog.engine", "WARNING"):
            solutions, _ = solve(self.db, "m:f(X)")
        self.assertEqual(solutions, [{"X": "1"}])
        self.assertIsNone(self.db.predicate("user", ("f", 1), create=False))


class ScopeTest(SimpleTestCase):
    """Tests for calls to non-exported predicates."""

    def test_warning(self):
        """Test a qualified call to a private predicate succeeds with a warning."""
        db = load_fixtures("library.pl").db
        with self.assertLogs("prolog.engine", "WARNING") as logs:
            solutions, engine = run_query(db, "library:me(X)", options(), io.StringIO())
        self.assertEqual([s.as_text() for s in solutions], [{"X": "library"}])
        self.assertEqual(engine.scope_warnings, ["library:me/1"])
        self.assertIn("library:me/1", logs.output[0])

    def test_strict_scope(self):
        """Test strict scope turns the warning into a permission error."""
        db = load_fixtures("library.pl").db
        with self.assertLogs("prolog.engine", "WARNING"), self.assertRaises(PrologError) as cm:
            solve(db, "library:me(X)", strict_scope=True)
        self.assertEqual(
            formal_text(cm.exception),
            "permission_error(access,private_procedure,library:me/1)",
        )

    def test_exported_predicate_has_no_warning(self):
        """Test exported predicates are reached silently."""
        db = load_fixtures(*CLIENT_PROGRAMS["v1"]).db
        _, engine = run_query(db, "client:test(_)", options(), io.StringIO())
        self.assertEqual(engine.scope_warnings, [])


class ExpansionAgreementTest(SimpleTestCase):
    """Tests that load-time expansion agrees with run-time qualification."""

    CORPUS = [
        (("library.pl", "client.pl"), ["client:test(Me)", "test(Me)", "findall(M, client:test(M), L)"]),
        (("library.pl", "client_v2.pl"), ["client:test(Me)", "test(Me)", "findall(M, client:test(M), L)"]),
        (("library.pl", "client_v3.pl"), ["client:test(Me)", "test(Me)"]),
        (("strip_module.pl",), ["mp(true, C)", "m:mp(true, C)", "mp(fail, C)", "mp(m:true, C)"]),
        (("qualifier_pattern.pl",), ["mp(true, C)", "m:mp(true, C)", "mp(fail, C)"]),
        (("tool.pl",), ["mp(true, C)", "m:mp(true, C)"]),
        (("transparent.pl",), ["whoami(M)", "t:whoami(M)", "run(true, M)", "run(whoami(X), M)"]),
        (("library.pl", "nested.pl"), ["client:test(Me)", "client:twice(Me)", "client:each(X, Y)"]),
        (("fictitious.pl",), ["client:test(x)"]),
    ]
    AGREEMENT = ("library.pl", "closures.pl", "agreement.pl")

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.programs = {}

    def program(self, names, expand):
        key = (names, expand)
        if key not in self.programs:
            self.programs[key] = load_fixtures(*names, expand=expand).db
        return self.programs[key]

    def agreement_query(self, rng):
        items = [rng.choice(["a", "b", "skip", "1", "f(x)"]) for _ in range(rng.randint(0, 4))]
        items = f"[{', '.join(items)}]"
        return rng.choice(
            [
                f"map_double({items}, R)",
                f"map_tag({items}, R)",
                f"all_keep({items})",
                f"maplist(double, {items}, R)",
                f"closures:maplist(add({rng.randint(0, 9)}), {items}, R)",
                "greet(Me)",
                "collect(L), guarded(G)",
            ]
        )

    def test_expanded_and_runtime_programs_agree(self):
        """Test expanded and unexpanded programs give the same answers."""
        pairs = [(names, query) for names, queries in self.CORPUS for query in queries]
        rng = random.Random(3)
        while len(pairs) < 160:
            pairs.append((self.AGREEMENT, self.agreement_query(rng)))
        checked = 0
        for names, query in pairs:
            for semantics in ("calling", "lookup"):
                with self.subTest(program=names, query=query, semantics=semantics):
                    self.assertEqual(
                        outcome(self.program(names, True), query, semantics),
                        outcome(self.program(names, False), query, semantics),
                    )
                checked += 1
        self.assertGreaterEqual(checked, 300)
