"""Toy stage-2 scorer: a prediction is correct when its last standalone
capital letter A-D equals the ground truth.

usage: letter_scorer.py <predictions.jsonl> <output.jsonl>
"""

import json
import re
import sys
from pathlib import Path


def main(pred_path: str, out_path: str) -> int:
    out = []
    for line in Path(pred_path).read_text().splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        letters = re.findall(r"\b([A-D])\b", rec.get("response") or "")
        ok = bool(letters) and letters[-1] == rec["ground_truth"]
        out.append({"sample_id": rec["sample_id"], "correct": ok})
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    Path(out_path).write_text("".join(json.dumps(r) + "\n" for r in out))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
