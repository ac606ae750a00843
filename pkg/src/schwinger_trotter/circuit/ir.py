"""Gate list representation and gate census."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

ONE_QUBIT = {"X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg", "Rz"}
TWO_QUBIT = {"CNOT", "ControlledPhase"}
# AndUncompute is a Toffoli that erases a logical-AND ancilla.  It acts as a
# Toffoli in evaluation, but a fault-tolerant device does it with a
# measurement and a classically controlled CZ, so it carries no T cost.
THREE_QUBIT = {"Toffoli", "AndUncompute"}
MARKERS = {"AncillaAlloc", "AncillaFree"}
PARAMETRIC = {"Rz", "Phase", "ControlledPhase"}
KINDS = ONE_QUBIT | TWO_QUBIT | THREE_QUBIT | MARKERS | {"Phase"}

_ARITY = {**{k: 1 for k in ONE_QUBIT | MARKERS}, **{k: 2 for k in TWO_QUBIT},
          **{k: 3 for k in THREE_QUBIT}, "Phase": 0}
_INVERSE_KIND = {"S": "Sdg", "Sdg": "S", "T": "Tdg", "Tdg": "T",
                 "AncillaAlloc": "AncillaFree", "AncillaFree": "AncillaAlloc"}


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...] = ()
    theta: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} acts on {_ARITY[self.kind]} qubits, got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.kind}{self.qubits}")
        if (self.theta is None) == (self.kind in PARAMETRIC):
            raise ValueError(f"{self.kind} angle mismatch")

    def inverse(self) -> "Gate":
        if self.kind in PARAMETRIC:
            return Gate(self.kind, self.qubits, -self.theta)
        return Gate(_INVERSE_KIND.get(self.kind, self.kind), self.qubits)


@dataclass
class Circuit:
    """Ordered gates on ``n_qubits`` register qubits.

    Qubits with index >= n_qubits are ancillas; each use must sit between an
    AncillaAlloc and an AncillaFree, and the ancilla must be back in |0> when
    freed.
    """

    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    name: str = ""

    def append(self, kind: str, *qubits: int, theta: float | None = None) -> "Circuit":
        self.gates.append(Gate(kind, tuple(int(q) for q in qubits), theta))
        return self

    def extend(self, other: "Circuit", offset: int = 0, qubit_map=None) -> "Circuit":
        """Append another circuit, relabelling its qubits by ``qubit_map`` or ``offset``."""
        for g in other.gates:
            if qubit_map is not None:
                qs = tuple(qubit_map[q] for q in g.qubits)
            else:
                qs = tuple(q + offset for q in g.qubits)
            self.gates.append(Gate(g.kind, qs, g.theta))
        return self

    @property
    def width(self) -> int:
        """Register plus ancilla qubits."""
        top = max((max(g.qubits) for g in self.gates if g.qubits), default=-1)
        return max(self.n_qubits, top + 1)

    @property
    def ancilla_high_water(self) -> int:
        live: set[int] = set()
        high = 0
        for g in self.gates:
            if g.kind == "AncillaAlloc":
                live.add(g.qubits[0])
                high = max(high, len(live))
            elif g.kind == "AncillaFree":
                live.discard(g.qubits[0])
        return high

    def __len__(self):
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(max(self.n_qubits, other.n_qubits), self.gates + other.gates, self.name)


def dagger(circuit: Circuit) -> Circuit:
    """Reverse the gate order and invert every gate."""
    return Circuit(circuit.n_qubits, [g.inverse() for g in reversed(circuit.gates)],
                   circuit.name + "^dag" if circuit.name else "")


def live_ancillas(circuit: Circuit) -> set[int]:
    live: set[int] = set()
    for g in circuit.gates:
        if g.kind == "AncillaAlloc":
            live.add(g.qubits[0])
        elif g.kind == "AncillaFree":
            live.discard(g.qubits[0])
    return live


def place(target: Circuit, sub: Circuit, reg: list[int]) -> None:
    """Append ``sub`` with its register on ``reg``.

    The sub-circuit's ancillas go just above the target's register and any
    ancillas still live in the target, so sequential blocks reuse indices.
    """
    base = max([target.n_qubits] + [q + 1 for q in live_ancillas(target)])
    qmap = {i: q for i, q in enumerate(reg)}
    for g in sub.gates:
        for q in g.qubits:
            if q >= sub.n_qubits:
                qmap[q] = base + q - sub.n_qubits
    target.extend(sub, qubit_map=qmap)


def check_ancillas(circuit: Circuit) -> None:
    """Every ancilla gate sits inside an alloc/free bracket."""
    live: set[int] = set()
    for g in circuit.gates:
        if g.kind == "AncillaAlloc":
            q = g.qubits[0]
            if q < circuit.n_qubits or q in live:
                raise ValueError(f"bad AncillaAlloc on qubit {q}")
            live.add(q)
        elif g.kind == "AncillaFree":
            if g.qubits[0] not in live:
                raise ValueError(f"AncillaFree on unallocated qubit {g.qubits[0]}")
            live.remove(g.qubits[0])
        else:
            for q in g.qubits:
                if q >= circuit.n_qubits and q not in live:
                    raise ValueError(f"{g.kind} touches unallocated ancilla {q}")
    if live:
        raise ValueError(f"ancillas never freed: {sorted(live)}")


@dataclass(frozen=True)
class GateCensus:
    counts: dict
    rotations: int
    cnot: int
    toffoli: int
    and_uncompute: int
    ancilla_high_water: int

    @property
    def total(self) -> int:
        return sum(v for k, v in self.counts.items() if k not in MARKERS and k != "Phase")


def count_gates(circuit: Circuit) -> GateCensus:
    counts = Counter(g.kind for g in circuit.gates)
    return GateCensus(
        counts=dict(counts),
        rotations=counts["Rz"],
        cnot=counts["CNOT"],
        toffoli=counts["Toffoli"],
        and_uncompute=counts["AndUncompute"],
        ancilla_high_water=circuit.ancilla_high_water,
    )


class AncillaPool:
    """Hands out ancilla indices above the register, reusing freed ones."""

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        self.free: list[int] = []
        self.next = circuit.width

    def alloc(self) -> int:
        q = self.free.pop() if self.free else self._fresh()
        self.circuit.append("AncillaAlloc", q)
        return q

    def _fresh(self) -> int:
        q = self.next
        self.next += 1
        return q

    def release(self, q: int) -> None:
        self.circuit.append("AncillaFree", q)
        self.free.append(q)
