"""Generate the 127-task synthetic portfolio fixture.

The fixture reproduces the marginals of the published five-domain
assessment round: per-domain activity/task counts, level counts
60/44/16/7 (L1 share 47.2%), three-rater agreement displaying as 0.80,
and mean compliance sensitivity displaying as 2.4. Scores are placed so
that exactly seven tasks change level under a +/-0.2 threshold
perturbation (5.51%), and exactly three L2 tasks carry D4 = 4 so that
enabling the oversight floor reclassifies precisely those three.

Vectors are keyed by their weighted sum S = d1+d2+d3+1.5*d4+d5 (score =
S/5.5 under default weights). "Safe" sums keep a distance of more than
0.35 below or 0.15 above every level cut (11 / 16.5 / 22), so neither
the baseline boundary zone nor a 0.2 threshold shift can move them.

Usage: python3 tools/make_benchmark_fixture.py [out_dir]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from partis.scoring import (
    DimensionScores,
    Level,
    ScoringPolicy,
    Thresholds,
    WeightVector,
    assign_level,
    sensitivity_analysis,
    weight_fingerprint,
)

OUT_DIR = Path(sys.argv[1]) if len(sys.argv) > 1 else (
    Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "benchmark")

WEIGHTS = WeightVector()
THRESHOLDS = Thresholds()
# The published round reports pre-floor levels; the fixture config
# disables the floor and the floor demo re-enables it separately.
POLICY = ScoringPolicy(floor_enabled=False,
                       weight_fingerprint=weight_fingerprint(WEIGHTS))

# Safe consensus vectors, cycled per level. Sums: L1 in [5.5, 9],
# L2 in [12.5, 14.5], L3 in [18.5, 20], L4 in [23, 27.5].
SAFE_POOLS: dict[str, list[tuple[int, int, int, int, int]]] = {
    "L1": [
        (2, 1, 1, 2, 1), (1, 1, 1, 1, 1), (2, 2, 1, 2, 1), (2, 1, 1, 1, 2),
        (1, 1, 2, 2, 1), (1, 2, 1, 2, 1), (2, 2, 1, 1, 2), (1, 1, 1, 2, 2),
    ],
    "L2": [
        (3, 2, 2, 3, 2), (3, 3, 2, 2, 2), (3, 3, 2, 3, 2), (2, 2, 2, 3, 2),
        (3, 3, 3, 2, 2), (2, 3, 2, 3, 2), (3, 2, 2, 3, 3), (2, 3, 3, 2, 2),
    ],
    "L3": [
        (4, 4, 3, 4, 3), (4, 4, 3, 3, 3), (4, 3, 3, 4, 3), (4, 4, 4, 3, 3),
        (3, 4, 3, 4, 4), (3, 4, 4, 3, 4),
    ],
    "L4": [
        (5, 4, 4, 4, 4), (5, 5, 4, 5, 4), (5, 5, 5, 4, 4), (5, 4, 4, 5, 4),
        (5, 5, 4, 4, 4), (5, 5, 5, 5, 4), (5, 5, 5, 4, 5),
    ],
}

# Engineered specials. FLIP12/23/34 sit 0.18 beyond a threshold so only
# the matching -0.2 perturbation reaches them; FLOOR tasks are ordinary
# L2 scores with D4 = 4.
SPECIAL_VECTORS: dict[str, tuple[int, int, int, int, int]] = {
    "FLIP12": (2, 2, 2, 2, 1),    # sum 10.0, score 1.818
    "FLIP23": (3, 3, 3, 3, 2),    # sum 15.5, score 2.818, d4 swing up
    "FLIP34": (4, 4, 4, 4, 3),    # sum 21.0, score 3.818
    "FLOOR_A": (2, 2, 1, 4, 2),   # sum 13.0
    "FLOOR_B": (2, 2, 2, 4, 2),   # sum 14.0
    "FLOOR_C": (2, 1, 2, 4, 2),   # sum 13.0
}
SPECIAL_LEVEL = {"FLIP12": "L1", "FLIP23": "L2", "FLIP34": "L2",
                 "FLOOR_A": "L2", "FLOOR_B": "L2", "FLOOR_C": "L2"}

# Third-rater vectors for dissent tasks, one clean level away.
DISSENT_VECTOR = {
    "L1": (3, 3, 2, 2, 2),   # reads as L2
    "L2": (2, 2, 1, 1, 2),   # reads as L1
    "L3": (3, 3, 3, 2, 2),   # reads as L2
    "L4": (4, 3, 3, 4, 3),   # reads as L3
}
# Every k-th safe task of a level gets a dissenting third rater;
# 12 + 8 + 2 + 2 = 24 dissents put three-rater agreement at 0.802.
DISSENT_STEP = {"L1": 5, "L2": 5, "L3": 7, "L4": 4}

# (domain, code, activities, per-level label lists). Labels are consumed
# in order and dealt round-robin across the domain's activities.
DOMAINS = [
    ("Project Mgmt", "PM", 8,
     ["FLIP12"] + ["L1"] * 15 + ["FLIP23"] + ["L2"] * 9
     + ["FLIP34"] + ["L3"] * 3 + ["L4"] * 2),
    ("Requirements", "RM", 6,
     ["L1"] * 12 + ["FLIP23"] + ["FLOOR_C"] + ["L2"] * 6
     + ["L3"] * 3 + ["L4"] * 1),
    ("Architecture", "SA", 5,
     ["L1"] * 7 + ["FLIP23"] + ["L2"] * 7
     + ["FLIP34"] + ["L3"] * 3 + ["L4"] * 2),
    ("Test Mgmt", "TM", 7,
     ["FLIP12"] + ["L1"] * 15 + ["L2"] * 8 + ["L3"] * 3 + ["L4"] * 1),
    ("Config. Mgmt", "CM", 6,
     ["L1"] * 9 + ["FLOOR_A"] + ["FLOOR_B"] + ["L2"] * 8
     + ["L3"] * 2 + ["L4"] * 1),
]

NAMES = [
    "Review Milestone Plan", "Update Risk Register", "Draft Status Report",
    "Verify Baseline Records", "Prepare Meeting Minutes", "Check Deliverable List",
    "Collect Stakeholder Feedback", "Document Decision Log", "Estimate Work Packages",
    "Archive Release Notes", "Validate Traceability Matrix", "Schedule Review Session",
    "Inspect Change Requests", "Summarize Audit Findings", "Track Open Issues",
    "Classify Defect Reports",
]
ROLES = ["LLMAgent", "Hybrid", "System", "Human"]
MODES = ["Deterministic", "Heuristic", "Probabilistic"]
OUTPUT_NAMES = ["status summary", "updated register", "review record",
                "checked baseline", "meeting record"]


def build() -> tuple[dict, dict, dict]:
    pool_cursor = {level: 0 for level in SAFE_POOLS}
    safe_index = {level: 0 for level in SAFE_POOLS}
    name_cursor = 0

    activities_doc = []
    ratings_rows = []
    task_no = 0

    for domain, code, n_activities, labels in DOMAINS:
        activity_tasks: list[list[dict]] = [[] for _ in range(n_activities)]
        for i, label in enumerate(labels):
            task_no += 1
            if label in SPECIAL_VECTORS:
                vector = SPECIAL_VECTORS[label]
                level = SPECIAL_LEVEL[label]
                dissent = None
            else:
                level = label
                pool = SAFE_POOLS[level]
                vector = pool[pool_cursor[level] % len(pool)]
                pool_cursor[level] += 1
                dissent = None
                if safe_index[level] % DISSENT_STEP[level] == 0:
                    dissent = DISSENT_VECTOR[level]
                safe_index[level] += 1

            slot = i % n_activities
            ordinal = len(activity_tasks[slot]) + 1
            task_id = f"{code}.{slot + 1}.{ordinal}"
            name = NAMES[name_cursor % len(NAMES)]
            name_cursor += 1
            d1 = vector[0]
            task = {
                "id": task_id,
                "name": name,
                "role": ROLES[task_no % len(ROLES)],
                "inputs": [{
                    "id": f"ART-{task_id}-IN",
                    "name": "working notes",
                    "format": "markdown",
                }],
                "logic": {
                    "steps": [{
                        "description": f"{name} against the activity checklist.",
                        "bloom_level": min(d1, 5),
                    }],
                    "tools": [],
                    "determinism": MODES[task_no % len(MODES)],
                },
                "outputs": [{
                    "id": f"ART-{task_id}-OUT",
                    "name": OUTPUT_NAMES[task_no % len(OUTPUT_NAMES)],
                    "format": "markdown",
                    "dod": ["content matches the activity checklist"],
                    "deliverable": True,
                }],
            }
            activity_tasks[slot].append(task)

            raters = {"R1": vector, "R2": vector,
                      "R3": dissent if dissent is not None else vector}
            for rater in ("R1", "R2", "R3"):
                d = raters[rater]
                ratings_rows.append({
                    "task_id": task_id, "rater_id": rater,
                    "d1": d[0], "d2": d[1], "d3": d[2], "d4": d[3], "d5": d[4],
                })

        for slot in range(n_activities):
            activities_doc.append({
                "id": f"ACT-{code}-{slot + 1}",
                "name": f"{domain} Block {slot + 1}",
                "domain": domain,
                "tasks": activity_tasks[slot],
            })

    portfolio = {
        "schema_version": 1,
        "processes": [{
            "id": f"PROC-{code}",
            "name": f"{domain} Process",
            "activity_ids": [f"ACT-{code}-{k + 1}" for k in range(n_act)],
        } for domain, code, n_act, _ in DOMAINS],
        "activities": activities_doc,
    }
    ratings = {"raters": ["R1", "R2", "R3"], "ratings": ratings_rows}
    config = {
        "weights": {"w1": 1.0, "w2": 1.0, "w3": 1.0, "w4": 1.5, "w5": 1.0},
        "thresholds": {"t12": 2.0, "t23": 3.0, "t34": 4.0,
                       "boundary_halfwidth": 0.15},
        "policy": {
            "floor_enabled": False,
            "floor_d4_threshold": 4,
            "floor_level": "L3",
            "boundary_policy": "conservative_upgrade_with_d4_swing",
            "consensus": "median_round_up",
        },
        "weight_fingerprint": weight_fingerprint(WEIGHTS),
    }
    return portfolio, ratings, config


def verify(portfolio: dict, ratings: dict) -> None:
    """Recompute every engineered marginal and refuse to write on a miss."""
    rows = {}
    for entry in ratings["ratings"]:
        key = (entry["task_id"], entry["rater_id"])
        rows[key] = DimensionScores(entry["d1"], entry["d2"], entry["d3"],
                                    entry["d4"], entry["d5"])

    per_domain: dict[str, dict] = {}
    vectors = []
    rater_level_rows = []
    total_counts = {lv: 0 for lv in Level}
    sum_d4 = 0
    for activity in portfolio["activities"]:
        domain = activity["domain"]
        stats = per_domain.setdefault(
            domain, {"activities": 0, "tasks": 0,
                     "levels": {lv: 0 for lv in Level}})
        stats["activities"] += 1
        for task in activity["tasks"]:
            tid = task["id"]
            consensus = rows[(tid, "R1")]  # R1 == R2 keeps the median there
            vectors.append(consensus)
            sum_d4 += consensus.d4
            result = assign_level(consensus, WEIGHTS, THRESHOLDS, POLICY)
            stats["tasks"] += 1
            stats["levels"][result.level] += 1
            total_counts[result.level] += 1
            rater_level_rows.append(tuple(
                assign_level(rows[(tid, rater)], WEIGHTS, THRESHOLDS,
                             POLICY).level
                for rater in ("R1", "R2", "R3")))

    expected = {
        "Project Mgmt": (8, 32, 16, 10, 4, 2),
        "Requirements": (6, 24, 12, 8, 3, 1),
        "Architecture": (5, 21, 7, 8, 4, 2),
        "Test Mgmt": (7, 28, 16, 8, 3, 1),
        "Config. Mgmt": (6, 22, 9, 10, 2, 1),
    }
    for domain, (acts, tasks, l1, l2, l3, l4) in expected.items():
        stats = per_domain[domain]
        got = (stats["activities"], stats["tasks"],
               stats["levels"][Level.L1], stats["levels"][Level.L2],
               stats["levels"][Level.L3], stats["levels"][Level.L4])
        assert got == (acts, tasks, l1, l2, l3, l4), (domain, got)

    assert [total_counts[lv] for lv in Level] == [60, 44, 16, 7]
    n = sum(total_counts.values())
    assert n == 127

    # Three-rater Fleiss kappa over level assignments, direct formula.
    categories = list(Level)
    counts = [[row.count(cat) for cat in categories] for row in rater_level_rows]
    r = 3
    p_bar = sum((sum(c * c for c in row) - r) / (r * (r - 1))
                for row in counts) / n
    pk = [sum(row[k] for row in counts) / (n * r) for k in range(len(categories))]
    pe = sum(p * p for p in pk)
    kappa = (p_bar - pe) / (1 - pe)
    assert 0.795 <= kappa < 0.805, kappa

    mean_d4 = sum_d4 / n
    assert 2.35 <= mean_d4 < 2.45, mean_d4

    report = sensitivity_analysis(vectors, WEIGHTS, THRESHOLDS, POLICY,
                                  delta=0.2)
    assert report.changed_count == 7, report.changed_count

    floor_policy = ScoringPolicy(weight_fingerprint=POLICY.weight_fingerprint)
    moved = [
        v for v in vectors
        if assign_level(v, WEIGHTS, THRESHOLDS, floor_policy).level
        != assign_level(v, WEIGHTS, THRESHOLDS, POLICY).level
    ]
    assert len(moved) == 3, len(moved)

    print(f"127 tasks, levels 60/44/16/7, L1 {100 * 60 / 127:.1f}%")
    print(f"kappa {kappa:.4f} (displays {kappa:.2f})")
    print(f"mean d4 {mean_d4:.4f} (displays {mean_d4:.1f})")
    print(f"perturbation flips {report.changed_count} "
          f"({report.changed_fraction:.4f})")
    print(f"floor reclassifies {len(moved)}")


def main() -> None:
    portfolio, ratings, config = build()
    verify(portfolio, ratings)
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, doc in [("portfolio.json", portfolio), ("ratings.json", ratings),
                      ("config.json", config)]:
        path = OUT_DIR / name
        path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n",
                        encoding="utf-8")
        print("wrote", path)


if __name__ == "__main__":
    main()
