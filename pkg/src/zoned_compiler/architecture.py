"""Zoned array geometry: a storage grid below a paired entanglement zone."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
from itertools import combinations
from typing import Iterator

import numpy as np

from .ir import Circuit


class Zone(str, Enum):
    STORAGE = "storage"
    ENTANGLEMENT = "entanglement"


LEFT, RIGHT = 0, 1


class ArchitectureError(ValueError):
    pass


@dataclass(frozen=True)
class ArchitectureConfig:
    """Lengths in micrometres."""

    storage_cols: int = 10
    storage_rows: int = 4
    ent_sites_per_row: int = 5
    ent_rows: int = 4
    storage_pitch_x: float = 6.0
    storage_pitch_y: float = 6.0
    intra_pair_gap: float = 4.0
    inter_site_gap: float = 6.0
    ent_row_pitch: float = 6.0
    zone_gap: float = 12.0
    rydberg_radius: float = 5.0

    def __post_init__(self) -> None:
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ArchitectureError(f"{f.name} must be positive")
        if not self.intra_pair_gap < self.rydberg_radius <= self.inter_site_gap:
            raise ArchitectureError("need intra_pair_gap < rydberg_radius <= inter_site_gap")
        if min(self.storage_pitch_x, self.storage_pitch_y) <= self.rydberg_radius:
            raise ArchitectureError("storage pitch must exceed the rydberg radius")
        if self.ent_row_pitch < self.rydberg_radius:
            raise ArchitectureError("entanglement row pitch must be at least the rydberg radius")

    @classmethod
    def for_circuit(cls, n_qubits: int, max_stage_width: int, **overrides) -> "ArchitectureConfig":
        """Size the arrays by capacity: square-ish storage, one pair site per stage gate."""
        base = cls(**{k: v for k, v in overrides.items() if k not in _SIZE_FIELDS})
        cols = max(1, math.ceil(math.sqrt(max(n_qubits, 1))))
        rows = max(1, math.ceil(max(n_qubits, 1) / cols))
        site_pitch = base.intra_pair_gap + base.inter_site_gap
        per_row = max(1, math.ceil((cols - 1) * base.storage_pitch_x / site_pitch) + 1)
        per_row = min(per_row, max(max_stage_width, 1))
        ent_rows = max(1, math.ceil(max(max_stage_width, 1) / per_row))
        sized = dict(storage_cols=cols, storage_rows=rows, ent_sites_per_row=per_row, ent_rows=ent_rows)
        sized.update({k: v for k, v in overrides.items() if k in _SIZE_FIELDS})
        return replace(base, **sized)

    @property
    def storage_capacity(self) -> int:
        return self.storage_cols * self.storage_rows

    @property
    def n_pair_sites(self) -> int:
        return self.ent_sites_per_row * self.ent_rows

    @property
    def n_sites(self) -> int:
        return self.storage_capacity + 2 * self.n_pair_sites

    @property
    def ent_origin_y(self) -> float:
        return (self.storage_rows - 1) * self.storage_pitch_y + self.zone_gap

    @property
    def site_pitch_x(self) -> float:
        return self.intra_pair_gap + self.inter_site_gap

    def to_dict(self) -> dict:
        return asdict(self)


_SIZE_FIELDS = {"storage_cols", "storage_rows", "ent_sites_per_row", "ent_rows"}


@dataclass(frozen=True, order=True)
class Site:
    """A trap site. Storage: ``(row, col)``; entanglement: ``(row, col=pair site, slot)``."""

    zone: Zone
    row: int
    col: int
    slot: int | None = None

    @classmethod
    def storage(cls, row: int, col: int) -> "Site":
        return cls(Zone.STORAGE, row, col)

    @classmethod
    def entanglement(cls, row: int, site: int, slot: int) -> "Site":
        return cls(Zone.ENTANGLEMENT, row, site, slot)

    def __str__(self) -> str:
        if self.zone is Zone.STORAGE:
            return f"S({self.row},{self.col})"
        side = {LEFT: "L", RIGHT: "R"}.get(self.slot, self.slot)
        return f"E({self.row},{self.col},{side})"


def _check_bounds(config: ArchitectureConfig, site: Site) -> None:
    if site.zone is Zone.STORAGE:
        ok = 0 <= site.row < config.storage_rows and 0 <= site.col < config.storage_cols
    else:
        ok = (
            0 <= site.row < config.ent_rows
            and 0 <= site.col < config.ent_sites_per_row
            and site.slot in (LEFT, RIGHT)
        )
    if not ok:
        raise ArchitectureError(f"site {site} out of bounds")


def site_position(config: ArchitectureConfig, site: Site) -> tuple[float, float]:
    _check_bounds(config, site)
    if site.zone is Zone.STORAGE:
        return site.col * config.storage_pitch_x, site.row * config.storage_pitch_y
    x = site.col * config.site_pitch_x + site.slot * config.intra_pair_gap
    y = config.ent_origin_y + site.row * config.ent_row_pitch
    return x, y


class SiteTable:
    """Dense integer indexing of all sites.

    Storage site ``(r, c)`` has index ``r * cols + c``; entanglement slot
    ``(r, s, slot)`` has index ``capacity + 2 * (r * per_row + s) + slot``.
    """

    def __init__(self, config: ArchitectureConfig):
        self.config = config
        self.n_storage = config.storage_capacity
        self.n_pairs = config.n_pair_sites
        self.n_sites = config.n_sites
        self.sites: list[Site] = list(self._enumerate())
        pos = np.array([site_position(config, s) for s in self.sites], dtype=np.float64)
        self.xs = np.ascontiguousarray(pos[:, 0]) if len(pos) else np.zeros(0)
        self.ys = np.ascontiguousarray(pos[:, 1]) if len(pos) else np.zeros(0)
        self._index = {s: i for i, s in enumerate(self.sites)}

    def _enumerate(self) -> Iterator[Site]:
        c = self.config
        for r in range(c.storage_rows):
            for col in range(c.storage_cols):
                yield Site.storage(r, col)
        for r in range(c.ent_rows):
            for s in range(c.ent_sites_per_row):
                yield Site.entanglement(r, s, LEFT)
                yield Site.entanglement(r, s, RIGHT)

    def index(self, site: Site) -> int:
        return self._index[site]

    def is_storage(self, idx: int) -> bool:
        return idx < self.n_storage

    def pair_of(self, idx: int) -> int:
        """Pair-site number of an entanglement slot index."""
        return (idx - self.n_storage) // 2

    def slot_index(self, pair: int, slot: int) -> int:
        return self.n_storage + 2 * pair + slot

    def position(self, idx: int) -> tuple[float, float]:
        return float(self.xs[idx]), float(self.ys[idx])


class Occupancy:
    """Bijective site <-> qubit map."""

    def __init__(self, mapping: dict[int, Site] | None = None):
        self._by_qubit: dict[int, Site] = {}
        self._by_site: dict[Site, int] = {}
        for q, s in (mapping or {}).items():
            self.place(q, s)

    def place(self, qubit: int, site: Site) -> None:
        if site in self._by_site:
            raise ArchitectureError(f"site {site} already holds q{self._by_site[site]}")
        if qubit in self._by_qubit:
            raise ArchitectureError(f"q{qubit} already placed at {self._by_qubit[qubit]}")
        self._by_site[site] = qubit
        self._by_qubit[qubit] = site

    def remove(self, qubit: int) -> Site:
        site = self._by_qubit.pop(qubit)
        del self._by_site[site]
        return site

    def move(self, qubit: int, site: Site) -> None:
        old = self.remove(qubit)
        try:
            self.place(qubit, site)
        except ArchitectureError:
            self.place(qubit, old)
            raise

    def site_of(self, qubit: int) -> Site:
        return self._by_qubit[qubit]

    def qubit_at(self, site: Site) -> int | None:
        return self._by_site.get(site)

    def items(self):
        return sorted(self._by_qubit.items())

    def qubits(self) -> list[int]:
        return sorted(self._by_qubit)

    def copy(self) -> "Occupancy":
        return Occupancy(dict(self._by_qubit))

    def __len__(self) -> int:
        return len(self._by_qubit)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Occupancy) and self._by_qubit == other._by_qubit


def blockade_pairs(
    config: ArchitectureConfig, occupancy: Occupancy, zone: Zone = Zone.ENTANGLEMENT
) -> set[tuple[int, int]]:
    """Qubit pairs in ``zone`` closer than the rydberg radius (strictly)."""
    atoms = [(q, site_position(config, s)) for q, s in occupancy.items() if s.zone is zone]
    pairs = set()
    for (qa, pa), (qb, pb) in combinations(atoms, 2):
        if math.dist(pa, pb) < config.rydberg_radius:
            pairs.add((min(qa, qb), max(qa, qb)))
    return pairs


@dataclass(frozen=True)
class CapacityVerdict:
    ok: bool
    storage_required: int
    storage_available: int
    ent_required: int
    ent_available: int

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "capacity ok"
        parts = []
        if self.storage_required > self.storage_available:
            parts.append(f"storage needs {self.storage_required}, has {self.storage_available}")
        if self.ent_required > self.ent_available:
            parts.append(f"entanglement sites needed {self.ent_required}, available {self.ent_available}")
        return "insufficient capacity: " + "; ".join(parts)


def min_capacity_check(config: ArchitectureConfig, circuit: Circuit, max_stage_width: int | None = None) -> CapacityVerdict:
    if max_stage_width is None:
        from .scheduler import asap_schedule

        max_stage_width = asap_schedule(circuit).max_width
    ok = config.storage_capacity >= circuit.n_qubits and config.n_pair_sites >= max_stage_width
    return CapacityVerdict(ok, circuit.n_qubits, config.storage_capacity, max_stage_width, config.n_pair_sites)
