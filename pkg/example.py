#!/usr/bin/env python3
"""
Example script demonstrating the eliminax engine
"""

from pathlib import Path

from app.services.corpus_service import random_corpus
from app.services.elimination_service import EliminationService, eliminate_lines, replay_lines
from app.services.lattice_service import compare_operators, order_independence_trial
from app.services.operator_service import make_operator

FIXTURES = Path(__file__).parent / "tests" / "fixtures"


def example_usage():
    """Eliminate, compare and sample relaxations on finite games"""
    print("🚀 Eliminax Example")
    print("=" * 50)

    service = EliminationService()
    try:
        game = service.load_game((FIXTURES / "pd.game").read_text(encoding="utf-8"))
        print(f"✅ Loaded game '{game.name}' with strategies {game.strategy_labels}")
    except (OSError, ValueError) as e:
        print(f"❌ Failed to load game: {e}")
        return

    # Trace of one operator
    print("\n🔁 Iterating GSbar...")
    for line in eliminate_lines(service.eliminate(game, "gsbar")):
        print(f"   {line}")

    # Mixed dominance removes more than pure dominance
    print("\n⚖️  Comparing GS with MGS...")
    mixed = service.load_game((FIXTURES / "mixed_dominance.game").read_text(encoding="utf-8"))
    for line in service.compare(mixed, ["gs", "mgs"]).lines:
        print(f"   {line}")

    # Sampled relaxations on a random game
    print("\n🎲 Order independence on a random 3-player game...")
    random_game = random_corpus(7, 1, players=3)[0]
    report = order_independence_trial(make_operator("grbar", random_game, "correlated"), trials=10, seed=7)
    for summary in report.outcomes:
        print(f"   {random_game.render_restriction(summary.restriction)} : {summary.count} trials")
    print(f"   single outcome: {report.singleton}")

    coincide = compare_operators([make_operator(t, random_game) for t in ("gs", "gsbar", "ls", "lsbar")])
    print(f"   dominance operators: {coincide.render(random_game.render_restriction)[0]}")

    print("\n✅ Example completed!")


def example_replay():
    """Replay an infinite game past the first limit stage"""
    print("\n♾️  Replaying nat_minus_one_GRbar through w+2")
    print("=" * 50)
    response = EliminationService().replay_example("nat_minus_one_GRbar", "w+2")
    for line in replay_lines(response):
        print(f"   {line}")


def example_api_usage():
    """Example of how to use the REST API"""
    print("\n🌐 REST API Usage Example")
    print("=" * 50)

    print("Start the service with: python -m uvicorn app.main:app --reload")
    print("\nThen use these endpoints:")
    print("  POST /eliminate - Iterate an operator on a game")
    print("  POST /eliminate/file - Same, with the game uploaded as a file")
    print("  POST /compare - Iterate operators in lockstep")
    print("  POST /order-independence - Outcomes of sampled relaxations")
    print("  POST /check - Properties B, C, D, E and MD along a trace")
    print("  GET /examples - List the symbolic examples")
    print("  GET /examples/{name}/replay - Validate an example")
    print("  GET /health - Health check")
    print("\nAPI Documentation: http://localhost:8000/docs")


if __name__ == "__main__":
    example_usage()
    example_replay()
    example_api_usage()
