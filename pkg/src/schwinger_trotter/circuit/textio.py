"""Line-oriented circuit text format.

One gate per line, ``KIND q0 [q1 [q2]] [theta]``, angles in radians with 17
significant digits.  A header line ``# n_qubits <n>`` records the register
size; other ``#`` lines are comments.
"""
from .ir import PARAMETRIC, Circuit, Gate


def dumps(circuit: Circuit) -> str:
    lines = [f"# n_qubits {circuit.n_qubits}"]
    if circuit.name:
        lines.append(f"# name {circuit.name}")
    for g in circuit.gates:
        parts = [g.kind, *map(str, g.qubits)]
        if g.theta is not None:
            parts.append(format(g.theta, ".17g"))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def loads(text: str) -> Circuit:
    n_qubits = None
    name = ""
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            fields = line[1:].split(maxsplit=1)
            if fields and fields[0] == "n_qubits":
                n_qubits = int(fields[1])
            elif fields and fields[0] == "name" and len(fields) > 1:
                name = fields[1]
            continue
        kind, *rest = line.split()
        theta = None
        if kind in PARAMETRIC:
            if not rest:
                raise ValueError(f"line {lineno}: {kind} needs an angle")
            theta = float(rest.pop())
        try:
            gates.append(Gate(kind, tuple(int(q) for q in rest), theta))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if n_qubits is None:
        n_qubits = max((max(g.qubits) + 1 for g in gates if g.qubits), default=0)
    return Circuit(n_qubits, gates, name)
