from pathlib import Path

from django.test import Client, TestCase
from django.urls import reverse

from .support import LINT, masked, program

LIBRARY_CLIENT = Path(program("library.pl")).read_text() + "\n" + Path(program("client_v2.pl")).read_text()


class QueryApiTest(TestCase):
    """Tests for the query API."""

    def setUp(self):
        self.client = Client()
        self.url = reverse("api_query")

    def test_get_not_allowed(self):
        """Test the endpoint accepts POST only."""
        self.assertEqual(self.client.get(self.url).status_code, 405)

    def test_query_under_both_semantics(self):
        """Test the semantics flag changes the answer."""
        for semantics, expected in [("calling", "library"), ("lookup", "client")]:
            with self.subTest(semantics=semantics):
                response = self.client.post(
                    self.url, {"program": LIBRARY_CLIENT, "goal": "client:test(Me)", "semantics": semantics}
                )
                self.assertEqual(response.status_code, 200)
                data = response.json()
                self.assertEqual(data["solutions"], [{"Me": expected}])
                self.assertEqual(masked(data["output"]), f"Calling: {expected}:me(_G)\n")
                self.assertIsNone(data["error"])
                self.assertEqual(data["meta_calls"], 2)

    def test_all_solutions(self):
        """Test the all flag returns every solution."""
        data = {"program": "n(1).\nn(2).", "goal": "n(X)"}
        self.assertEqual(len(self.client.post(self.url, data).json()["solutions"]), 1)
        self.assertEqual(len(self.client.post(self.url, {**data, "all": "on"}).json()["solutions"]), 2)

    def test_scope_warnings(self):
        """Test calls to private predicates are reported."""
        response = self.client.post(self.url, {"program": LIBRARY_CLIENT, "goal": "library:me(X)"})
        self.assertEqual(response.json()["scope_warnings"], ["library:me/1"])

    def test_uncaught_error(self):
        """Test an uncaught error is returned as text."""
        response = self.client.post(self.url, {"program": "", "goal": "fictitious:predicate(x)"})
        self.assertTrue(response.json()["error"].startswith("error(existence_error(procedure,fictitious:predicate/1),"))

    def test_missing_goal(self):
        """Test a request without a goal is rejected."""
        response = self.client.post(self.url, {"program": "p."})
        self.assertEqual(response.status_code, 400)
        self.assertEqual(response.json(), {"error": "goal is required"})

    def test_invalid_flags(self):
        """Test invalid flags are rejected."""
        response = self.client.post(self.url, {"goal": "true", "semantics": "dynamic"})
        self.assertEqual(response.status_code, 400)
        self.assertIn("--semantics", response.json()["error"])

    def test_program_syntax_error(self):
        """Test a program that does not parse is reported."""
        data = self.client.post(self.url, {"program": "p(.", "goal": "p"}).json()
        self.assertEqual(data["solutions"], [])
        self.assertIn("<program>:1:", data["error"])


class LintApiTest(TestCase):
    """Tests for the lint API."""

    def setUp(self):
        self.client = Client()
        self.url = reverse("api_lint")

    def test_diagnostics(self):
        """Test diagnostics are returned with rule, position and predicate."""
        source = (LINT / "sr3_outside.pl").read_text()
        data = self.client.post(self.url, {"program": source}).json()
        self.assertIsNone(data["error"])
        self.assertEqual(
            data["diagnostics"],
            [
                {
                    "rule": "SR3",
                    "severity": "error",
                    "line": 4,
                    "column": 1,
                    "message": "closure P of show/2 used outside call/2-N",
                    "predicate": "show/2",
                }
            ],
        )

    def test_portability_ceiling(self):
        """Test the portability ceiling can be raised per request."""
        source = (LINT / "p1_call_ceiling.pl").read_text()
        self.assertEqual(len(self.client.post(self.url, {"program": source}).json()["diagnostics"]), 1)
        data = self.client.post(self.url, {"program": source, "portability_call_n": 16}).json()
        self.assertEqual(data["diagnostics"], [])

    def test_load_error(self):
        """Test a program that does not load is reported."""
        data = self.client.post(self.url, {"program": "p(."}).json()
        self.assertEqual(data["diagnostics"], [])
        self.assertIsNotNone(data["error"])
