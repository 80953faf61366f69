#!/usr/bin/env python3
"""Download the standard benchmark datasets used by the acceptance tests.

Files come from the LIBSVM binary-classification collection. Each download
is parsed, label-normalized to {-1, +1} where the upstream file uses other
tags, and re-serialized under the output directory, so the CLI can train on
the files directly. Sizes are checked against the published catalog numbers;
mismatches print warnings but keep the file, since upstream revisions shift
counts slightly.

Needs network access. On machines without it, fetch the files elsewhere and
drop them into the data directory by hand; every consumer only cares that
$SCSVM_DATA_DIR/<name> parses as svmlight text with signed labels.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from scsvm.data import LabelMap, parse_svmlight, remap_labels, serialize_svmlight  # noqa: E402

BASE_URL = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary"


@dataclass(frozen=True)
class RemoteDataset:
    name: str               # local file name
    remote: str             # file name on the server
    expected_n: int
    expected_m: int
    expected_nnz: int
    expected_density_pct: float
    label_map: dict | None  # raw tag -> signed label, None when already signed


# Expected sizes follow the published catalog. The a1a entry points at the
# test-side file: the catalog row for a1a counts that part (the train side
# has n=1605), and the evaluation protocol here uses the bigger file.
CATALOG = (
    RemoteDataset("a1a", "a1a.t", 30956, 123, 429343, 11.28, None),
    RemoteDataset("heart", "heart", 270, 13, 3510, 100.0, None),
    RemoteDataset("mushrooms", "mushrooms", 8124, 112, 170604, 18.75,
                  {1.0: 1.0, 2.0: -1.0}),
    RemoteDataset("breast-cancer", "breast-cancer", 683, 10, 6830, 100.0,
                  {2.0: 1.0, 4.0: -1.0}),
    RemoteDataset("svmguide1", "svmguide1", 3089, 4, 12356, 100.0,
                  {1.0: 1.0, 0.0: -1.0}),
)


def fetch_text(url: str, timeout: float) -> str:
    with urllib.request.urlopen(url, timeout=timeout) as response:
        return response.read().decode("ascii")


def check_stats(entry: RemoteDataset, ds) -> list[str]:
    st = ds.stats()
    problems = []
    if st.n != entry.expected_n:
        problems.append(f"n={st.n}, expected {entry.expected_n}")
    if st.m != entry.expected_m:
        problems.append(f"m={st.m}, expected {entry.expected_m}")
    if st.nnz != entry.expected_nnz:
        problems.append(f"nnz={st.nnz}, expected {entry.expected_nnz}")
    if abs(st.density_pct - entry.expected_density_pct) > 0.01:
        problems.append(
            f"density={st.density_pct:.2f}%, expected {entry.expected_density_pct:.2f}%"
        )
    return problems


def fetch_one(entry: RemoteDataset, out_dir: Path, timeout: float) -> bool:
    url = f"{BASE_URL}/{entry.remote}"
    try:
        text = fetch_text(url, timeout)
    except (urllib.error.URLError, OSError, UnicodeDecodeError) as exc:
        print(f"error: {entry.name}: cannot download {url}: {exc}", file=sys.stderr)
        return False
    try:
        ds = parse_svmlight(io.StringIO(text))
        if entry.label_map is not None:
            ds = remap_labels(ds, LabelMap(entry.label_map))
        ds.assert_signed()
    except ValueError as exc:
        print(f"error: {entry.name}: downloaded file does not parse: {exc}",
              file=sys.stderr)
        return False
    for problem in check_stats(entry, ds):
        print(f"warning: {entry.name}: {problem}", file=sys.stderr)
    target = out_dir / entry.name
    serialize_svmlight(ds, target)
    st = ds.stats()
    print(f"{entry.name}: n={st.n} m={st.m} nnz={st.nnz} "
          f"density={st.density_pct:.2f}% -> {target}")
    return True


def _catalog_epilog() -> str:
    lines = ["sources (for manual download):"]
    for e in CATALOG:
        mapping = ("labels " + ", ".join(f"{int(k)}->{int(v):+d}"
                                         for k, v in e.label_map.items())
                   if e.label_map else "labels already signed")
        lines.append(f"  {e.name:<14} {BASE_URL}/{e.remote}  ({mapping})")
    return "\n".join(lines)


def main() -> int:
    parser = argparse.ArgumentParser(
        description=__doc__,
        epilog=_catalog_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--out-dir",
        default=os.environ.get("SCSVM_DATA_DIR")
        or str(Path(__file__).resolve().parent.parent / "data"),
        help="target directory [$SCSVM_DATA_DIR, else repo data/]",
    )
    parser.add_argument("--only", help="comma-separated subset of names")
    parser.add_argument("--timeout", type=float, default=60.0,
                        help="per-file download timeout in seconds [60]")
    args = parser.parse_args()

    wanted = set(args.only.split(",")) if args.only else None
    entries = [e for e in CATALOG if wanted is None or e.name in wanted]
    if wanted:
        unknown = wanted - {e.name for e in CATALOG}
        if unknown:
            parser.error(f"unknown dataset names: {', '.join(sorted(unknown))}")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    failures = sum(0 if fetch_one(e, out_dir, args.timeout) else 1 for e in entries)
    if failures:
        print(f"{failures} of {len(entries)} downloads failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
