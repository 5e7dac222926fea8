"""CSV helpers shared by trajectories, panels and agent profiles."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .exceptions import OutOfRangeOpinion, ParseError

KX_HEADER = ["k", "agent_id", "opinion"]


def write_states_csv(path, ks, states) -> None:
    """Write an opinion matrix (one row per step) as ``k,agent_id,opinion`` rows."""
    states = np.asarray(states, dtype=float)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(KX_HEADER)
        for k, row in zip(ks, states):
            for i, value in enumerate(row):
                writer.writerow([int(k), i, repr(float(value))])


def read_states_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`write_states_csv`.

    Rows must be grouped by strictly increasing ``k`` and every group must
    list agents ``0..n-1`` exactly once. Opinions outside [0, 1] raise
    :class:`OutOfRangeOpinion`.
    """
    path = Path(path)
    groups: list[tuple[int, dict[int, float]]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != KX_HEADER:
            raise ParseError(f"{path}: expected header {','.join(KX_HEADER)!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 fields")
            try:
                k, agent, value = int(row[0]), int(row[1]), float(row[2])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            if not 0.0 <= value <= 1.0:
                raise OutOfRangeOpinion(f"{path}:{lineno}: opinion {value} outside [0, 1]")
            if not groups or groups[-1][0] != k:
                if groups and k <= groups[-1][0]:
                    raise ParseError(f"{path}:{lineno}: k={k} is not increasing")
                groups.append((k, {}))
            bucket = groups[-1][1]
            if agent in bucket:
                raise ParseError(f"{path}:{lineno}: agent {agent} repeated at k={k}")
            bucket[agent] = value
    if not groups:
        raise ParseError(f"{path}: no rows")
    n = len(groups[0][1])
    ks = np.array([k for k, _ in groups], dtype=int)
    states = np.empty((len(groups), n))
    for r, (k, bucket) in enumerate(groups):
        if sorted(bucket) != list(range(n)):
            raise ParseError(f"{path}: k={k} does not list agents 0..{n - 1} exactly once")
        states[r] = [bucket[i] for i in range(n)]
    return ks, states


def write_profile_csv(path, x_plus, s) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "x_plus", "s"])
        for i, (xp, si) in enumerate(zip(x_plus, s)):
            writer.writerow([i, repr(float(xp)), repr(float(si))])


def read_profile_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``id,x_plus,s`` rows; ids must be exactly ``0..n-1``."""
    path = Path(path)
    rows: dict[int, tuple[float, float]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["id", "x_plus", "s"]:
            raise ParseError(f"{path}: expected header 'id,x_plus,s'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 fields")
            try:
                i, xp, si = int(row[0]), float(row[1]), float(row[2])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            if i in rows:
                raise ParseError(f"{path}:{lineno}: id {i} repeated")
            rows[i] = (xp, si)
    if sorted(rows) != list(range(len(rows))) or not rows:
        raise ParseError(f"{path}: ids must be 0..n-1, each exactly once")
    arr = np.array([rows[i] for i in range(len(rows))])
    return arr[:, 0], arr[:, 1]
