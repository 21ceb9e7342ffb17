from __future__ import annotations

import hashlib
import json
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path


# -------------------------
# Costanti di progetto
# -------------------------
# Tutte sovrascrivibili da ambiente (o da file .env caricato dalla CLI), es.
#   PLASMON_N_MAX=120 python -m plasmon.main spectrum --config configs/resonance.json
N_MAX = int(os.getenv("PLASMON_N_MAX", "80"))

# Ordine massimo accettato dalle tabelle di Bessel/Hankel
ORDER_LIMIT = int(os.getenv("PLASMON_ORDER_LIMIT", "400"))

# Quadratura: N_theta = N_max + QUAD_PAD di default
QUAD_PAD = int(os.getenv("PLASMON_QUAD_PAD", "8"))
QUAD_TOL = float(os.getenv("PLASMON_QUAD_TOL", "1e-10"))

# Fascia esclusa attorno alla superficie, in unita' di R
DELTA_MIN = float(os.getenv("PLASMON_DELTA_MIN", "0.02"))

# Soglie per "molto grande" / "molto piccolo"
THETA_BIG = float(os.getenv("PLASMON_THETA_BIG", "10"))
THETA_SMALL = float(os.getenv("PLASMON_THETA_SMALL", "1e-2"))

THREADS = int(os.getenv("PLASMON_THREADS", "1"))


class Numerics:
    Z_MIN = 1e-12
    RECURRENCE_PAD = 32
    DUAL_LAMBDA_TOL = 1e-8
    DEGENERATE_TOL = 1e-12
    SINGULAR_TAU = 1e-14
    TANGENTIAL_TOL = 1e-8
    TRUNCATION_TOL = 1e-6
    EQUALITY_TOL = 1e-9
    STRICT_SLACK = 1e-12
    # coppie (punti x nodi) per blocco nella valutazione dei potenziali
    KERNEL_CHUNK = 400_000


class Channels:
    TM = (1, 2)   # psi lungo grad x nu, phi lungo grad
    TE = (3, 4)   # psi lungo grad, phi lungo grad x nu
    ALL = (1, 2, 3, 4)


# -------------------------
# Scrittura atomica
# -------------------------
@contextmanager
def atomic_output(path: str | Path):
    """Restituisce un path temporaneo nella stessa cartella; rename finale solo se tutto ok."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, target)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def config_hash(payload: dict) -> str:
    """Hash stabile (sha256 troncato) di un dizionario serializzabile."""
    blob = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def env_overrides(prefix: str = "PLASMON_") -> dict[str, str]:
    return {k[len(prefix):].lower(): v for k, v in os.environ.items() if k.startswith(prefix)}
