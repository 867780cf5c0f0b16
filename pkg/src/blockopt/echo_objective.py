"""Reference child for the subprocess protocol: the value is the sum of numeric inputs.

``--crash-every N`` makes the process exit without answering every N-th request,
which exercises the parent's restart path.
"""

import argparse
import json
import sys


def main(argv=None) -> int:
    p = argparse.ArgumentParser()
    p.add_argument("--crash-every", type=int, default=0)
    p.add_argument("dataset", nargs="?")
    args = p.parse_args(argv)
    seen = 0
    for line in sys.stdin:
        req = json.loads(line)
        seen += 1
        if args.crash_every and seen % args.crash_every == 0:
            return 3
        values = req["assignment"].values()
        total = sum(v for v in values if isinstance(v, (int, float)) and not isinstance(v, bool))
        sys.stdout.write(json.dumps({"id": req["id"], "value": total}) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
