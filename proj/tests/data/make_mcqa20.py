#!/usr/bin/env python3
"""Writes the 20-item synthetic MCQA dataset and its 5-trial fixtures.

Trial t answers the first CORRECT[t] items correctly. Of the rest, odd
items get a wrong letter and even items a refusal (an extraction failure).
Expected per-trial accuracy: 0.60, 0.70, 0.65, 0.70, 0.60.
"""
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.join(HERE, "mcqa20")
CORRECT = [12, 14, 13, 14, 12]
LETTERS = "ABCD"

os.makedirs(ROOT, exist_ok=True)
with open(os.path.join(ROOT, "dataset.jsonl"), "w") as f:
    for i in range(20):
        f.write(json.dumps({
            "id": f"q{i:02d}",
            "kind": "mcqa",
            "question": f"Synthetic security question number {i}?",
            "options": [f"option {c} for question {i}" for c in LETTERS],
            "gold": LETTERS[i % 4],
        }) + "\n")

STYLES = [
    "Answer: {x}",
    "<think>Comparing the four options against the scenario.</think>\nAnswer: {x}",
    "The second option is a distractor.\n\n**Answer: {x}**",
    "```\nAnswer: ({x})\n```",
]
for i in range(20):
    d = os.path.join(ROOT, "fixtures", f"q{i:02d}")
    os.makedirs(d, exist_ok=True)
    gold = LETTERS[i % 4]
    for t, c in enumerate(CORRECT):
        if i < c:
            body = STYLES[(i + t) % 4].format(x=gold)
        elif i % 2 == 1:
            body = STYLES[(i + t) % 4].format(x=LETTERS[(i + 1) % 4])
        else:
            body = "I'm not able to answer this question."
        with open(os.path.join(d, f"{t}.txt"), "w") as f:
            f.write(body + "\n")
