import itertools
import math

import pytest

from zoned_compiler.architecture import (
    LEFT,
    RIGHT,
    ArchitectureConfig,
    ArchitectureError,
    Occupancy,
    Site,
    SiteTable,
    Zone,
    blockade_pairs,
    min_capacity_check,
    site_position,
)
from zoned_compiler.ir import Circuit

DEFAULT = ArchitectureConfig()


def enumerate_layout(cfg):
    """Independent walk over the grid: accumulate gaps instead of using pitch formulas."""
    out = {}
    y = 0.0
    for r in range(cfg.storage_rows):
        x = 0.0
        for c in range(cfg.storage_cols):
            out[Site.storage(r, c)] = (x, y)
            x += cfg.storage_pitch_x
        top = y
        y += cfg.storage_pitch_y
    y = top + cfg.zone_gap
    for r in range(cfg.ent_rows):
        x = 0.0
        for s in range(cfg.ent_sites_per_row):
            out[Site.entanglement(r, s, LEFT)] = (x, y)
            x += cfg.intra_pair_gap
            out[Site.entanglement(r, s, RIGHT)] = (x, y)
            x += cfg.inter_site_gap
        y += 6.0
    return out


def test_positions_examples():
    assert site_position(DEFAULT, Site.storage(0, 0)) == (0, 0)
    assert site_position(DEFAULT, Site.storage(1, 2)) == (12, 6)
    x, y = site_position(DEFAULT, Site.entanglement(0, 1, RIGHT))
    assert x == 14
    assert y == (DEFAULT.storage_rows - 1) * 6 + 12


@pytest.mark.parametrize("cfg", [DEFAULT, ArchitectureConfig(storage_cols=3, storage_rows=5, ent_sites_per_row=2, ent_rows=3)])
def test_positions_match_enumerator(cfg):
    ref = enumerate_layout(cfg)
    table = SiteTable(cfg)
    assert len(ref) == table.n_sites == cfg.n_sites
    for site, pos in ref.items():
        assert site_position(cfg, site) == pytest.approx(pos, abs=1e-12)
        assert table.position(table.index(site)) == pytest.approx(pos, abs=1e-12)


def test_out_of_bounds():
    for bad in (Site.storage(4, 0), Site.storage(0, -1), Site.entanglement(0, 5, LEFT), Site.entanglement(0, 0, 2)):
        with pytest.raises(ArchitectureError):
            site_position(DEFAULT, bad)


def test_config_invariants():
    with pytest.raises(ArchitectureError):
        ArchitectureConfig(intra_pair_gap=5.0)
    with pytest.raises(ArchitectureError):
        ArchitectureConfig(inter_site_gap=4.5)
    with pytest.raises(ArchitectureError):
        ArchitectureConfig(storage_pitch_x=5.0)
    with pytest.raises(ArchitectureError):
        ArchitectureConfig(zone_gap=0.0)


def test_entanglement_distances_exhaustive():
    table = SiteTable(DEFAULT)
    ent = range(table.n_storage, table.n_sites)
    for a, b in itertools.combinations(ent, 2):
        d = math.dist(table.position(a), table.position(b))
        if table.pair_of(a) == table.pair_of(b):
            assert d == pytest.approx(4.0)
        else:
            assert d >= 6.0 - 1e-12


def _occ(assign):
    return Occupancy({q: s for q, s in enumerate(assign)})


def test_blockade_examples():
    both = _occ([Site.entanglement(0, 0, LEFT), Site.entanglement(0, 0, RIGHT)])
    assert blockade_pairs(DEFAULT, both) == {(0, 1)}
    lefts = _occ([Site.entanglement(0, 0, LEFT), Site.entanglement(0, 1, LEFT)])
    assert blockade_pairs(DEFAULT, lefts) == set()
    assert blockade_pairs(DEFAULT, _occ([Site.storage(0, 0), Site.storage(0, 1)])) == set()


def test_blockade_full_zone_one_pair_per_site():
    sites = [Site.entanglement(r, s, k) for r in range(4) for s in range(5) for k in (LEFT, RIGHT)]
    pairs = blockade_pairs(DEFAULT, _occ(sites))
    assert pairs == {(2 * i, 2 * i + 1) for i in range(20)}


def test_radius_is_strict():
    cfg = ArchitectureConfig(intra_pair_gap=4.0, rydberg_radius=5.0, inter_site_gap=5.0, ent_row_pitch=6.0)
    occ = _occ([Site.entanglement(0, 0, RIGHT), Site.entanglement(0, 1, LEFT)])  # exactly 5 apart
    assert blockade_pairs(cfg, occ) == set()


def test_capacity():
    example7 = Circuit.from_ops(7, [("cz", (0, 1))])
    assert min_capacity_check(DEFAULT, example7)
    v = min_capacity_check(ArchitectureConfig(ent_sites_per_row=4, ent_rows=1), Circuit(10), max_stage_width=5)
    assert not v
    assert (v.ent_required, v.ent_available) == (5, 4)
    assert "needed 5, available 4" in str(v)
    big = ArchitectureConfig(storage_cols=10, storage_rows=10)
    assert min_capacity_check(big, Circuit(100), max_stage_width=1)
    assert not min_capacity_check(big, Circuit(101), max_stage_width=1)


def test_for_circuit_sizes():
    cfg = ArchitectureConfig.for_circuit(100, 50)
    assert cfg.storage_capacity == 100
    assert cfg.n_pair_sites >= 50
    assert ArchitectureConfig.for_circuit(7, 3, zone_gap=20.0).zone_gap == 20.0
    assert ArchitectureConfig.for_circuit(7, 3, storage_cols=10).storage_cols == 10


def test_occupancy_bijective():
    occ = Occupancy()
    occ.place(0, Site.storage(0, 0))
    with pytest.raises(ArchitectureError):
        occ.place(1, Site.storage(0, 0))
    with pytest.raises(ArchitectureError):
        occ.place(0, Site.storage(0, 1))
    occ.place(1, Site.storage(0, 1))
    with pytest.raises(ArchitectureError):
        occ.move(1, Site.storage(0, 0))
    assert occ.site_of(1) == Site.storage(0, 1)
    occ.move(1, Site.storage(1, 1))
    assert occ.qubit_at(Site.storage(1, 1)) == 1
    assert occ.qubit_at(Site.storage(0, 1)) is None
    assert occ.copy() == occ and len(occ) == 2
    assert Site.storage(0, 0).zone is Zone.STORAGE
