import unittest
from pathlib import Path

from fastapi.testclient import TestClient

from app.main import app

FIXTURES = Path(__file__).parent / "fixtures"


class TestEliminaxApi(unittest.TestCase):
    """API tests against the in-process application"""

    @classmethod
    def setUpClass(cls):
        """Start the application once for all tests"""
        cls.client_context = TestClient(app)
        cls.client = cls.client_context.__enter__()
        cls.pd = (FIXTURES / "pd.game").read_text(encoding="utf-8")
        cls.mixed = (FIXTURES / "mixed_dominance.game").read_text(encoding="utf-8")

    @classmethod
    def tearDownClass(cls):
        cls.client_context.__exit__(None, None, None)

    def test_01_health_check(self):
        """Test health check endpoint"""
        response = self.client.get("/health")
        self.assertEqual(response.status_code, 200)
        data = response.json()
        self.assertEqual(data["status"], "healthy")
        self.assertEqual(data["operators"], 12)
        self.assertEqual(data["examples"], 15)
        self.assertIn("timestamp", data)

    def test_02_operators(self):
        """Test operator listing"""
        response = self.client.get("/operators")
        self.assertEqual(response.status_code, 200)
        operators = {op["token"]: op for op in response.json()}
        self.assertTrue(operators["lrbar"]["contracting"])
        self.assertTrue(operators["lrbar"]["needs_beliefs"])
        self.assertFalse(operators["lsbar"]["monotonic"])

    def test_03_eliminate(self):
        """Test elimination of the prisoner's dilemma"""
        response = self.client.post("/eliminate", json={"game": self.pd, "operator": "gsbar"})
        self.assertEqual(response.status_code, 200)
        data = response.json()
        self.assertEqual(data["operator"], "GSbar")
        self.assertEqual([s["restriction"] for s in data["stages"]], ["{C,D} | {C,D}", "{D} | {D}"])
        self.assertEqual(data["verdict"]["text"], "fixpoint at 1")
        self.assertEqual(data["closure"], "1")
        self.assertEqual(data["outcome"], "{D} | {D}")

    def test_04_eliminate_bad_game(self):
        """Test that parse errors are client errors"""
        response = self.client.post("/eliminate", json={"game": "players 2\n", "operator": "gs"})
        self.assertEqual(response.status_code, 400)
        self.assertIn("Game parsing failed: line 1", response.json()["detail"])

    def test_05_eliminate_unknown_operator(self):
        """Test unknown operator tokens"""
        response = self.client.post("/eliminate", json={"game": self.pd, "operator": "gsbr"})
        self.assertEqual(response.status_code, 400)
        self.assertIn("gsbar", response.json()["detail"])

    def test_06_eliminate_file(self):
        """Test multipart game upload"""
        response = self.client.post(
            "/eliminate/file",
            files={"file": ("mixed.game", self.mixed.encode("utf-8"), "text/plain")},
            data={"operator": "grbar", "beliefs": "correlated"},
        )
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.json()["outcome"], "{T,M} | {L,R}")

    def test_07_eliminate_file_not_utf8(self):
        """Test binary upload rejection"""
        response = self.client.post(
            "/eliminate/file",
            files={"file": ("bad.game", b"\xff\xfe\xfa", "application/octet-stream")},
            data={"operator": "gs"},
        )
        self.assertEqual(response.status_code, 400)

    def test_08_compare(self):
        """Test lockstep comparison"""
        response = self.client.post("/compare", json={"game": self.mixed, "operators": ["gs", "mgs"]})
        self.assertEqual(response.status_code, 200)
        data = response.json()
        self.assertFalse(data["comparison"]["coincide"])
        self.assertEqual(data["comparison"]["ordinal"], "1")
        self.assertEqual(data["comparison"]["stages"]["MGS"], "{T,M} | {L,R}")
        self.assertEqual(data["lines"][0], "diverge at stage 1")

    def test_09_compare_needs_operators(self):
        """Test request validation"""
        response = self.client.post("/compare", json={"game": self.pd, "operators": []})
        self.assertEqual(response.status_code, 422)

    def test_10_order_independence(self):
        """Test sampled relaxation outcomes"""
        response = self.client.post(
            "/order-independence", json={"game": self.pd, "operator": "gsbar", "trials": 5, "seed": 1}
        )
        self.assertEqual(response.status_code, 200)
        data = response.json()
        self.assertTrue(data["summary"]["singleton"])
        self.assertEqual(data["outcomes"][0]["restriction"], "{D} | {D}")
        self.assertEqual(data["outcomes"][0]["count"], 5)

    def test_11_order_independence_not_contracting(self):
        """Test that non-contracting operators are rejected"""
        response = self.client.post(
            "/order-independence", json={"game": self.pd, "operator": "gs", "trials": 2, "seed": 1}
        )
        self.assertEqual(response.status_code, 400)

    def test_12_check(self):
        """Test property evaluation"""
        response = self.client.post(
            "/check", json={"game": self.pd, "operator": "grbar", "beliefs": "point"}
        )
        self.assertEqual(response.status_code, 200)
        data = response.json()
        self.assertTrue(data["passed"])
        self.assertEqual(data["properties"][0]["property"], "B")

    def test_13_examples(self):
        """Test example listing"""
        response = self.client.get("/examples")
        self.assertEqual(response.status_code, 200)
        names = [example["name"] for example in response.json()]
        self.assertIn("nat_minus_one_GRbar", names)

    def test_14_replay(self):
        """Test example replay"""
        response = self.client.get("/examples/nat_minus_one_LRbar/replay", params={"upto": "w+1"})
        self.assertEqual(response.status_code, 200)
        data = response.json()
        self.assertTrue(data["validated"])
        self.assertEqual(data["closure"], "w")
        self.assertEqual(data["expected"], "fixpoint at w")

    def test_15_replay_unknown_example(self):
        """Test unknown example names"""
        response = self.client.get("/examples/bertrand/replay")
        self.assertEqual(response.status_code, 404)

    def test_16_replay_bad_window(self):
        """Test replay windows past w*2"""
        response = self.client.get("/examples/naturals_LS/replay", params={"upto": "w*3"})
        self.assertEqual(response.status_code, 400)

    def test_17_config(self):
        """Test configuration endpoint"""
        response = self.client.get("/config")
        self.assertEqual(response.status_code, 200)
        self.assertIn("engine", response.json())

    def test_18_check_mixed_property(self):
        """Test mixed dominators reported along a trace"""
        response = self.client.post(
            "/check", json={"game": self.mixed, "operator": "mlsbar", "properties": ["MD"]}
        )
        self.assertEqual(response.status_code, 200)
        data = response.json()
        self.assertTrue(data["passed"])
        self.assertEqual([p["ordinal"] for p in data["properties"]], ["0", "1"])
        self.assertEqual(data["properties"][0]["witnesses"], {"1:B": "1/2 T + 1/2 M"})


if __name__ == '__main__':
    unittest.main()
