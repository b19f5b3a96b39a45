#!/usr/bin/env python3
"""Reference backseat-driver client.

Broadcasts navigation references (heading and depth or altitude) to a
running station at a fixed rate, the way a payload computer or science
process would.  Stop sending and the vehicle reverts to its mission after
the staleness window.

Example:
    python3 scripts/backseat_client.py --heading 45 --depth 8 --rate 1 --duration 20
"""

import argparse
import json
import sys
import time
import urllib.error
import urllib.request


def send(url: str, doc: dict, timeout: float = 5.0) -> dict:
    req = urllib.request.Request(
        url + "/backseat",
        data=json.dumps(doc).encode(),
        headers={"Content-Type": "application/json"},
    )
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        return json.loads(resp.read())


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--url", default="http://127.0.0.1:8000",
                        help="station base URL")
    parser.add_argument("--session", default="backseat-cli")
    parser.add_argument("--heading", type=float, default=None,
                        help="desired heading, degrees")
    parser.add_argument("--depth", type=float, default=None,
                        help="desired depth, meters")
    parser.add_argument("--altitude", type=float, default=None,
                        help="desired altitude above seabed, meters")
    parser.add_argument("--rate", type=float, default=1.0,
                        help="messages per second")
    parser.add_argument("--duration", type=float, default=10.0,
                        help="seconds to keep broadcasting")
    args = parser.parse_args(argv)

    if args.depth is not None and args.altitude is not None:
        parser.error("--depth and --altitude are exclusive")
    if args.heading is None and args.depth is None and args.altitude is None:
        parser.error("nothing to steer: give --heading, --depth, or --altitude")

    end = time.monotonic() + args.duration
    period = 1.0 / args.rate
    sent = 0
    while time.monotonic() < end:
        doc = {"session": args.session, "timestamp": time.time()}
        if args.heading is not None:
            doc["heading_deg"] = args.heading
        if args.depth is not None:
            doc["depth_m"] = args.depth
        if args.altitude is not None:
            doc["altitude_m"] = args.altitude
        try:
            ack = send(args.url, doc)
        except urllib.error.URLError as err:
            print(f"send failed: {err}", file=sys.stderr)
            return 1
        sent += 1
        if not ack.get("ok"):
            print(f"rejected: {ack.get('error')}", file=sys.stderr)
        time.sleep(period)
    print(f"sent {sent} reference message(s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
