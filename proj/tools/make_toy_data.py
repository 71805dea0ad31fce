"""Regenerates the toy datasets under data/. Output is deterministic."""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "data"

CLASSES = ["fruit", "animal", "color", "tool"]
WORDS = {
    "fruit": ["apple", "banana", "cherry", "grape", "lemon", "mango", "pear", "plum"],
    "animal": ["cat", "dog", "horse", "otter", "tiger", "zebra", "camel", "mouse"],
    "color": ["red", "blue", "green", "yellow", "purple", "orange", "violet", "brown"],
    "tool": ["hammer", "saw", "wrench", "drill", "chisel", "pliers", "ladder", "shovel"],
}


def ppm(seed: int, size: int = 8) -> bytes:
    rng = random.Random(seed)
    a = bytes(rng.randrange(256) for _ in range(3))
    b = bytes(rng.randrange(256) for _ in range(3))
    body = b"".join(a if (x + y) % 2 else b for y in range(size) for x in range(size))
    return b"P6\n%d %d\n255\n" % (size, size) + body


def write_jsonl(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))


def toy_mc() -> None:
    """20 keyword questions; the scripted answer table gets 13 right."""
    out = ROOT / "toy_mc"
    rng = random.Random(7)
    rows, answers = [], {}
    letters = "ABCD"
    for i in range(20):
        cls = CLASSES[i % 4]
        word = rng.choice(WORDS[cls])
        sid = f"toy-{i:02d}"
        img = f"images/{sid}.ppm"
        (out / "images").mkdir(parents=True, exist_ok=True)
        (out / img).write_bytes(ppm(i))
        gt = letters[CLASSES.index(cls)]
        rows.append({
            "sample_id": sid,
            "prompt": f"Which kind of thing is '{word}'? Answer with a letter.",
            "images": [img],
            "ground_truth": gt,
            "category": "lexical" if i < 10 else "semantic",
            "options": {"A": "fruit", "B": "animal", "C": "color", "D": "tool"},
        })
        if i < 13:
            answers[sid] = f"The answer is {gt}."
        else:
            answers[sid] = letters[(CLASSES.index(cls) + 1) % 4]
    write_jsonl(out / "samples.jsonl", rows)
    (out / "answers.json").write_text(json.dumps(answers, indent=2, sort_keys=True) + "\n")


def toy_edit() -> None:
    """Six editing instructions over GEdit-style categories."""
    out = ROOT / "toy_edit"
    cats = ["bg_change", "color", "style", "subj-add", "subj-rm", "text"]
    instr = ["put the scene at a beach", "make the car red", "render it as a watercolor",
             "add a cat on the left", "remove the lamp", "write HELLO on the sign"]
    rows, answers = [], {}
    (out / "images").mkdir(parents=True, exist_ok=True)
    for i, (c, t) in enumerate(zip(cats, instr)):
        sid = f"edit-{i:02d}"
        img = f"images/{sid}.ppm"
        (out / img).write_bytes(ppm(100 + i))
        rows.append({"sample_id": sid, "prompt": t, "images": [img], "category": c,
                     "intersection": i % 2 == 0})
        answers[sid] = t
    write_jsonl(out / "samples.jsonl", rows)
    (out / "answers.json").write_text(json.dumps(answers, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    toy_mc()
    toy_edit()
