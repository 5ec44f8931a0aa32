"""Content-addressed on-disk cache of genus ledgers."""

from __future__ import annotations

import os
from pathlib import Path

from .lattice import OLattice
from .neighbours import GenusLedger, genus_enumerate, hecke_matrix, ledger_digest, prime_key
from .numbers import PrimeIdeal

ENV_VAR = "KNESER_CACHE_DIR"


def cache_dir() -> Path:
    root = Path(os.environ.get(ENV_VAR) or Path.home() / ".cache" / "kneser")
    root.mkdir(parents=True, exist_ok=True)
    return root


def genus_path(seed_l: OLattice, primes: list[PrimeIdeal]) -> Path:
    return cache_dir() / f"genus-{ledger_digest(seed_l, primes)}.json"


def _atomic_save(ledger: GenusLedger, path: Path):
    tmp = path.with_suffix(".tmp")
    ledger.save(str(tmp))
    os.replace(tmp, path)


def load_or_enumerate(seed_l: OLattice, primes: list[PrimeIdeal], force: bool = False,
                      threads: int = 1, log=None, max_classes: int = 1000) -> tuple[GenusLedger, Path]:
    """The cached ledger for (seed, primes), enumerating and saving it when absent."""
    path = genus_path(seed_l, primes)
    if path.exists() and not force:
        if log:
            log(f"loaded cached genus {path}")
        return GenusLedger.load(str(path)), path
    ledger = genus_enumerate(seed_l, primes, max_classes=max_classes, threads=threads, log=log)
    _atomic_save(ledger, path)
    return ledger, path


def ensure_hecke(ledger: GenusLedger, path: Path | str, prime: PrimeIdeal, threads: int = 1, log=None):
    """T_p for the ledger, computed one row at a time and checkpointed after each row."""
    key = prime_key(prime)
    if key in ledger.hecke:
        return ledger.hecke[key]
    path = Path(path)
    done = ledger.partial_rows.get(key, {})
    for i in range(ledger.h):
        if i in done:
            continue
        hecke_matrix(ledger, prime, threads=threads, log=log, rows=[i])
        _atomic_save(ledger, path)
    M = hecke_matrix(ledger, prime, threads=threads, log=log)
    _atomic_save(ledger, path)
    return M
