"""Run configuration schema (JSON, unknown keys rejected)."""

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

TASKS = ("couplings", "gate", "emit", "cz", "protocol", "sweep-fig3a", "sweep-fig3b", "sweep-fig3c", "sweep-figS1")


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Range(Strict):
    """Either explicit ``values`` or ``start/stop/num`` with linear or log spacing."""

    values: Optional[list[float]] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    num: Optional[int] = None
    spacing: Literal["linear", "log"] = "log"

    @model_validator(mode="after")
    def _check(self):
        if self.values is not None:
            if len(self.values) == 0:
                raise ValueError("range is empty")
        else:
            if self.start is None or self.stop is None or self.num is None:
                raise ValueError("range needs values or start/stop/num")
            if self.num < 1:
                raise ValueError("range is empty")
            if self.spacing == "log" and (self.start <= 0 or self.stop <= 0):
                raise ValueError("log range needs positive bounds")
        return self

    def array(self):
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        if self.spacing == "log":
            return np.logspace(np.log10(self.start), np.log10(self.stop), self.num)
        return np.linspace(self.start, self.stop, self.num)


class ArrayConfig(Strict):
    positions: Optional[list[float]] = None
    gamma0: float = Field(1.0, gt=0)
    gamma_prime: float = Field(0.0, ge=0)


class GateConfig(Strict):
    kind: Literal["R_DG", "R_GA", "P_A", "P_D", "P_G"] = "R_DG"
    theta: float = float(np.pi / 4)
    phi: float = float(-np.pi / 2)
    duration: Optional[float] = Field(None, ge=0)
    omega: Optional[float] = Field(0.05, ge=0)
    J: float = 10.0
    Delta: Optional[float] = None
    drive_detuning: Optional[float] = None
    stark_compensation: bool = True


class PacketConfig(Strict):
    kind: Literal["gaussian", "constant_J", "file"] = "gaussian"
    tau: Optional[float] = Field(None, gt=0)
    Jtilde: Optional[float] = Field(None, gt=0)
    bandwidth: Optional[float] = Field(None, gt=0)
    path: Optional[str] = None
    dt: float = Field(1e-3, gt=0)

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "file" and not self.path:
            raise ValueError("packet kind 'file' needs a path")
        if self.kind == "constant_J" and self.Jtilde is None and self.bandwidth is None:
            raise ValueError("constant_J packet needs Jtilde or bandwidth")
        return self


class EmitConfig(Strict):
    target: PacketConfig = PacketConfig(tau=1.75)
    d0: float = 0.0
    a0_imag: float = -1.0


class CZConfig(Strict):
    packet: PacketConfig = PacketConfig(tau=10.0, dt=0.02)
    J: float = 10.0
    padding: int = Field(8, ge=1)


class NoiseConfig(Strict):
    J: float = 10.0
    omega: float = Field(0.05, gt=0)
    gamma_prime: float = Field(0.0, ge=0)
    tau: float = Field(1.75, gt=0)
    Delta_D: float = 20.0
    cz_mode: Literal["refresh", "carry"] = "refresh"
    inline: bool = False


class ProtocolConfig(Strict):
    kind: Literal["GHZ", "CLUSTER_1D", "CLUSTER_2D"] = "GHZ"
    m: Optional[int] = Field(2, ge=1)
    M: Optional[int] = Field(None, ge=2)
    N: Optional[int] = Field(None, ge=2)
    gate_model: Literal["ideal", "noisy"] = "ideal"
    noise: NoiseConfig = NoiseConfig()


class Fig3aConfig(Strict):
    T: Range = Range(start=1.0, stop=300.0, num=11)
    J: float = 10.0
    gamma_prime: list[float] = Field(default_factory=lambda: [0.0, 1e-3], min_length=1)


class Fig3bConfig(Strict):
    J: Range = Range(start=5.0, stop=50.0, num=8)
    T: float = Field(10.0, gt=0)
    gamma_prime: list[float] = Field(default_factory=lambda: [0.0, 1e-3], min_length=1)


class Fig3cConfig(Strict):
    B: Range = Range(start=3e-3, stop=0.1, num=7)
    J: float = 10.0
    kinds: list[Literal["gaussian", "constant_J"]] = Field(default_factory=lambda: ["gaussian", "constant_J"], min_length=1)
    dt: float = Field(0.02, gt=0)


class FigS1Config(Strict):
    epsilon: Range = Range(values=[1e-3, 1e-2, 1e-1])
    modes: list[Literal["GAMMA_PRIME", "SPACING", "DISORDER"]] = Field(
        default_factory=lambda: ["GAMMA_PRIME", "SPACING", "DISORDER"], min_length=1
    )
    gate_realizations: int = Field(100, ge=1)
    emission_realizations: int = Field(50, ge=1)
    seed: int = Field(1234, ge=0)


class Numerics(Strict):
    dt: float = Field(1e-3, gt=0, le=1e-2)
    stride: int = Field(10, ge=1)


class RunConfig(Strict):
    task: Literal[TASKS]
    array: ArrayConfig = ArrayConfig()
    gate: GateConfig = GateConfig()
    emit: EmitConfig = EmitConfig()
    cz: CZConfig = CZConfig()
    protocol: ProtocolConfig = ProtocolConfig()
    fig3a: Fig3aConfig = Fig3aConfig()
    fig3b: Fig3bConfig = Fig3bConfig()
    fig3c: Fig3cConfig = Fig3cConfig()
    figS1: FigS1Config = FigS1Config()
    numerics: Numerics = Numerics()
    output_prefix: str = ""


def json_schema():
    return RunConfig.model_json_schema()
