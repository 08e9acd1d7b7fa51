"""Regenerate test/fixtures/scoring_cases.json from the backend scorer.

Run from the repo root with the package installed:
    python frontend/scripts/gen_scoring_cases.py
"""

import json
import random
from pathlib import Path

from prescribe.aggression import AggressionFinding, FindingRole, score
from prescribe.lexicon import ItemKind, ItemName


def main() -> None:
    rng = random.Random(4242)
    names = list(ItemName)
    cases = []
    for _ in range(300):
        picked = [rng.choice(names) for _ in range(rng.randint(0, 7))]
        findings = [
            AggressionFinding(
                n, None, FindingRole.AI if n.kind == ItemKind.AI else FindingRole.AC
            )
            for n in picked
        ]
        result = score(findings)
        cases.append(
            {
                "categories": [n.value for n in picked],
                "score": result.score,
                "level": int(result.level),
            }
        )
    out = Path(__file__).resolve().parent.parent / "test" / "fixtures" / "scoring_cases.json"
    out.write_text(json.dumps(cases, indent=1), encoding="utf-8")
    print(f"wrote {len(cases)} cases to {out}")


if __name__ == "__main__":
    main()
