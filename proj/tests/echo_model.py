#!/usr/bin/env python3
"""Reference model for subprocess-oracle tests.

Speaks the newline-delimited JSON protocol on stdin/stdout. The default
"loopback" behavior reports C=3 and answers each predict request with the
first three cells of time step 0, so the engine gets back exactly the vector
it sent -- which makes protocol conformance checkable without any model math.

Misbehavior modes (first CLI argument) let tests exercise the engine's
protocol-violation handling:
  garbage      emit a non-JSON line instead of the ready message
  wrong-id     answer with a mismatched request id
  bad-sum      answer with probabilities that do not sum to 1
  short-probs  answer with fewer than C probabilities
  die          exit after the handshake without answering anything
"""

import json
import sys


def main() -> int:
    mode = sys.argv[1] if len(sys.argv) > 1 else "loopback"
    out = sys.stdout

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        msg = json.loads(line)
        kind = msg.get("type")

        if kind == "handshake":
            if mode == "garbage":
                out.write("this is not json\n")
                out.flush()
                return 1
            out.write(json.dumps({"type": "ready", "C": 3}) + "\n")
            out.flush()
            if mode == "die":
                return 0
        elif kind == "predict":
            probs = [float(v) for v in msg["values"][0][:3]]
            reply = {"type": "probs", "id": msg["id"], "probs": probs}
            if mode == "wrong-id":
                reply["id"] = "not-" + msg["id"]
            elif mode == "bad-sum":
                reply["probs"] = [0.5, 0.5, 0.5]
            elif mode == "short-probs":
                reply["probs"] = probs[:2]
            out.write(json.dumps(reply) + "\n")
            out.flush()
        elif kind == "shutdown":
            return 0
        else:
            print(f"unknown message type: {kind}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
