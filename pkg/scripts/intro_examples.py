"""Run the worked examples end to end and print a one-line summary for each."""
import argparse
import json
import time

from modob.cli import run

EXAMPLES = [
    ("sqrt2, exact", ["report", "--exact", "--basis", "sqrt2.basis", "--gens", "L,sqrt2L"]),
    ("sqrt2, numeric", ["report", "--numeric", "--gens", "2,2^sqrt(2)"]),
    ("golden ratio, exact", ["report", "--exact", "--basis", "golden.basis", "--gens", "L,phiL"]),
    ("golden ratio, numeric", ["report", "--numeric", "--gens", "2,2^phi"]),
    ("rational powers", ["report", "--exact", "--basis", "lambdaQ.basis", "--gens", "L,L/3,L/5"]),
    ("ln 2, ln 3", ["relations", "--numeric", "--gens", "2,3", "--prec", "256", "--bound", "1000000"]),
    ("single generator", ["report", "--numeric", "--gens", "2"]),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--json", action="store_true", help="dump the full reports")
    args = parser.parse_args()
    for label, argv in EXAMPLES:
        t0 = time.perf_counter()
        doc, code = run(argv + ["--no-timings"])
        elapsed = time.perf_counter() - t0
        witness = (doc.get("witness") or {}).get("coeffs")
        print(f"{label:24s} exit {code:2d}  {doc.get('verdict', '?'):17s} witness {witness}  {elapsed:.2f} s")
        if args.json:
            print(json.dumps(doc, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
