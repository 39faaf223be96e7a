"""Pydantic 스키마 정의 — 채널 파일과 실행 설정."""
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from cqlab import config, qmat
from cqlab.packing import CqChannel
from cqlab.private import BipartiteCqChannel
from cqlab.qmat import Op

# 채널 파일의 확률·행렬 검증 허용 오차
SPEC_TOL = 1e-8

Pair = tuple[float, float]


def to_pairs(m: Op) -> list[list[Pair]]:
    """Complex matrix → nested [re, im] pairs."""
    return [[(float(v.real), float(v.imag)) for v in row] for row in np.asarray(m)]


def from_pairs(rows: list[list[Pair]]) -> Op:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128)


class ChannelSpec(BaseModel):
    """채널 파일: 입력 분포와 글자별 출력 밀도 행렬."""
    k: int = Field(..., ge=1, description="입력 알파벳 크기")
    p: list[float] = Field(..., description="입력 분포 (길이 k)")
    outputs: list[list[list[Pair]]] = Field(..., description="글자별 출력 행렬, [re, im] 쌍")
    bipartite: bool = Field(False, description="c→qq 채널이면 true (H_B ⊗ H_E)")
    d_B: int | None = Field(None, ge=1, description="Bob 차원 (bipartite 전용)")
    d_E: int | None = Field(None, ge=1, description="Eve 차원 (bipartite 전용)")

    @model_validator(mode="after")
    def _check(self) -> "ChannelSpec":
        if len(self.p) != self.k:
            raise ValueError(f"p has {len(self.p)} entries, expected k={self.k}")
        if any(v < 0 for v in self.p) or abs(sum(self.p) - 1.0) > SPEC_TOL:
            raise ValueError("p must be nonnegative and sum to 1")
        if len(self.outputs) != self.k:
            raise ValueError(f"{len(self.outputs)} output matrices for k={self.k}")
        mats = [qmat.check_density(from_pairs(o), SPEC_TOL, name=f"letter {i}")
                for i, o in enumerate(self.outputs)]
        if len({m.shape for m in mats}) != 1:
            raise ValueError("output matrices differ in size")
        if self.bipartite:
            if self.d_B is None or self.d_E is None:
                raise ValueError("bipartite channel needs d_B and d_E")
            if self.d_B * self.d_E != mats[0].shape[0]:
                raise ValueError(f"d_B*d_E={self.d_B * self.d_E} does not match output size {mats[0].shape[0]}")
        return self

    def matrices(self) -> list[Op]:
        return [qmat.hermitize(from_pairs(o)) for o in self.outputs]

    def channel(self) -> CqChannel:
        """Output channel W; for a bipartite file, the joint W^{BE} on H_B ⊗ H_E."""
        return CqChannel(tuple(self.matrices()))

    def bipartite_channel(self) -> BipartiteCqChannel:
        if not self.bipartite:
            raise ValueError("channel file is not bipartite")
        return BipartiteCqChannel(tuple(self.matrices()), self.d_B, self.d_E)


Subcommand = Literal["verify", "packing", "covering", "private", "entropy"]


class RunConfig(BaseModel):
    """한 번의 CLI 실행 설정."""
    subcommand: Subcommand
    channel: str | None = Field(None, description="채널 파일 경로")
    n: list[int] = Field(default_factory=lambda: [4], min_length=1, description="블록 길이")
    delta: float = Field(0.1, gt=0)
    eps: float = Field(0.1, gt=0, lt=1)
    t: float = Field(0.5, gt=0, lt=1)
    chi0: float | None = None
    chi1: float | None = None
    rate: float | None = None
    ln: list[int] | None = Field(None, min_length=1, description="덮개 집합 크기 L_n")
    mn: int | None = Field(None, ge=1, description="부호 크기 M_n")
    gamma: float | None = Field(None, description="디코더 임계값 γ_n")
    trials: int = Field(100, ge=1)
    seed: int = Field(0, ge=0, le=2 ** 64 - 1)
    out: str | None = None
    strict_disjoint: bool = False
    workers: int | None = Field(None, ge=1, le=32)
    eps_target: float | None = Field(None, gt=0)
    delta_target: float | None = Field(None, gt=0)
    events: bool = False
    quick: bool = False

    @field_validator("n")
    @classmethod
    def _n_range(cls, v: list[int]) -> list[int]:
        for n in v:
            if not 1 <= n <= config.MAX_N:
                raise ValueError(f"n={n} outside [1, {config.MAX_N}]")
        return v

    @field_validator("ln")
    @classmethod
    def _ln_positive(cls, v: list[int] | None) -> list[int] | None:
        if v is not None and any(x < 1 for x in v):
            raise ValueError("L_n must be >= 1")
        return v

    @model_validator(mode="after")
    def _needs_channel(self) -> "RunConfig":
        if self.subcommand != "verify" and self.channel is None:
            raise ValueError(f"{self.subcommand} needs --channel")
        return self
