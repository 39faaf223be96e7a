"""Channel fixtures and channel-file I/O.

    python -m cqlab.channels fixtures/     # write every fixture as JSON
"""
import argparse
import logging
import math
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from cqlab import qmat
from cqlab.models import ChannelSpec, to_pairs
from cqlab.packing import CqChannel
from cqlab.private import BipartiteCqChannel
from cqlab.qmat import Op

logger = logging.getLogger(__name__)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)


def rotated(w: CqChannel, u: Op) -> CqChannel:
    """x ↦ U W(x) U†."""
    return CqChannel(tuple(qmat.hermitize(u @ o @ u.conj().T) for o in w.outputs))


def distinguishable_qubit() -> CqChannel:
    """W(0) = |0⟩⟨0|, W(1) = |1⟩⟨1|; χ = 1 at uniform p."""
    return CqChannel((qmat.basis_state(0, 2), qmat.basis_state(1, 2)))


def hadamard_rotated() -> CqChannel:
    return rotated(distinguishable_qubit(), HADAMARD)


def zero_plus_qubit() -> CqChannel:
    """W(0) = |0⟩⟨0|, W(1) = |+⟩⟨+|; χ ≈ 0.6009 at uniform p."""
    return CqChannel((qmat.basis_state(0, 2), qmat.pure_state([1, 1])))


def degraded_wiretap(noise: float = 0.8) -> BipartiteCqChannel:
    """W^{BE}(x) = |x⟩⟨x| ⊗ [(1−noise)|x⟩⟨x| + noise·I/2].

    Bob reads x perfectly; Eve sees a depolarised copy, so I_c > 0 at uniform p.
    """
    if not 0 <= noise <= 1:
        raise ValueError("noise must lie in [0, 1]")
    eye = np.eye(2, dtype=np.complex128)
    outs = tuple(
        qmat.kron(qmat.basis_state(x, 2), (1 - noise) * qmat.basis_state(x, 2) + noise * eye / 2)
        for x in (0, 1))
    return BipartiteCqChannel(outs, 2, 2)


def rotated_bipartite(w: BipartiteCqChannel, u_b: Op, u_e: Op) -> BipartiteCqChannel:
    u = qmat.kron(u_b, u_e)
    return BipartiteCqChannel(tuple(qmat.hermitize(u @ o @ u.conj().T) for o in w.outputs),
                              w.d_b, w.d_e)


def degraded_wiretap_rotated(noise: float = 0.8) -> BipartiteCqChannel:
    """Same χ values as degraded_wiretap, different matrices."""
    return rotated_bipartite(degraded_wiretap(noise), HADAMARD, HADAMARD)


UNIFORM_BIT = (0.5, 0.5)

FIXTURES: dict[str, Callable[[], CqChannel | BipartiteCqChannel]] = {
    "distinguishable": distinguishable_qubit,
    "hadamard": hadamard_rotated,
    "zero_plus": zero_plus_qubit,
    "wiretap": degraded_wiretap,
    "wiretap_rotated": degraded_wiretap_rotated,
}


# ── 파일 입출력 ──────────────────────────────────────────

def spec_from_channel(w: CqChannel | BipartiteCqChannel, p: Sequence[float]) -> ChannelSpec:
    kw = {}
    if isinstance(w, BipartiteCqChannel):
        kw = {"bipartite": True, "d_B": w.d_b, "d_E": w.d_e}
    return ChannelSpec(k=len(w.outputs), p=[float(v) for v in p],
                       outputs=[to_pairs(o) for o in w.outputs], **kw)


def dump_channel_spec(spec: ChannelSpec, path: str | Path) -> None:
    Path(path).write_text(spec.model_dump_json(indent=2) + "\n", encoding="utf-8")


def load_channel_spec(path: str | Path) -> ChannelSpec:
    """Read and validate a channel file; raises pydantic ValidationError on bad content."""
    return ChannelSpec.model_validate_json(Path(path).read_text(encoding="utf-8"))


def write_fixtures(directory: str | Path) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, make in FIXTURES.items():
        path = out / f"{name}.json"
        dump_channel_spec(spec_from_channel(make(), UNIFORM_BIT), path)
        paths.append(path)
        logger.info("fixture written: %s", path)
    return paths


def main():
    logging.basicConfig(level=logging.INFO)
    parser = argparse.ArgumentParser(description="Write the channel fixtures as JSON files")
    parser.add_argument("directory", nargs="?", default="fixtures")
    args = parser.parse_args()
    write_fixtures(args.directory)


if __name__ == "__main__":
    main()
