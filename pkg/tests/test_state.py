import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qiup.errors import UnitarityError
from qiup.modes import Band, Mode, ModePair, Polarization, SourceTag
from qiup.state import BiphotonState, SourceSpec, initial_state
from qiup.elements import hwp_matrix

H, V = Polarization.H, Polarization.V
M1, M2, MM = SourceTag.SOURCE_1, SourceTag.SOURCE_2, SourceTag.MERGED


def pair(sp, spol, stag, ip, ipol, itag):
    return ModePair(Mode(sp, spol, Band.SIGNAL, stag), Mode(ip, ipol, Band.IDLER, itag))


def two_source_state():
    return initial_state([SourceSpec(1, "a", "a"), SourceSpec(2, "r", "r")])


class TestInitialState:
    def test_two_sources_unit_amplitudes(self):
        state = two_source_state()
        assert len(state) == 2
        assert state.amplitude(pair("a", V, M1, "a", V, M1)) == 1 + 0j
        assert state.amplitude(pair("r", V, M2, "r", V, M2)) == 1 + 0j
        assert state.norm_sq() == pytest.approx(2.0, abs=1e-15)

    def test_single_source(self):
        state = initial_state([SourceSpec(1, "s", "i")])
        assert len(state) == 1
        assert state.norm_sq() == pytest.approx(1.0, abs=1e-15)

    def test_phase_becomes_amplitude_phase(self):
        state = initial_state(
            [SourceSpec(1, "a", "a"), SourceSpec(2, "r", "r", phase=math.pi / 2)]
        )
        amp = state.amplitude(pair("r", V, M2, "r", V, M2))
        assert amp == pytest.approx(1j, abs=1e-15)

    def test_duplicate_source_id_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            initial_state([SourceSpec(1, "a", "a"), SourceSpec(1, "r", "r")])

    def test_empty_source_list_rejected(self):
        with pytest.raises(ValueError):
            initial_state([])


class TestNormSq:
    def test_two_unit_entries(self):
        assert two_source_state().norm_sq() == pytest.approx(2.0, abs=1e-15)

    def test_empty_state(self):
        assert BiphotonState().norm_sq() == 0.0

    def test_scaling(self):
        scaled = BiphotonState(
            {
                pair("a", V, M1, "a", V, M1): 1 / math.sqrt(2),
                pair("r", V, M2, "r", V, M2): 1j / math.sqrt(2),
            }
        )
        assert scaled.norm_sq() == pytest.approx(1.0, abs=1e-15)


class TestApplyPolUnitary:
    def test_identity_leaves_state_alone(self):
        state = two_source_state()
        assert state.apply_pol_unitary("a", np.eye(2)) == state

    def test_hwp45_moves_v_to_minus_h(self):
        state = initial_state([SourceSpec(1, "f", "f")])
        out = state.apply_pol_unitary("f", hwp_matrix(math.pi / 4), Band.IDLER)
        assert out.amplitude(pair("f", V, M1, "f", H, M1)) == pytest.approx(-1.0)
        assert out.amplitude(pair("f", V, M1, "f", V, M1)) == 0j

    def test_hwp0_negates_v(self):
        state = initial_state([SourceSpec(1, "f", "f")])
        out = state.apply_pol_unitary("f", hwp_matrix(0.0), Band.IDLER)
        assert out.amplitude(pair("f", V, M1, "f", V, M1)) == pytest.approx(-1.0)

    def test_non_unitary_rejected(self):
        with pytest.raises(UnitarityError):
            two_source_state().apply_pol_unitary("a", [[1, 0], [0, 0.5]])

    def test_band_filter_leaves_other_band_alone(self):
        state = initial_state([SourceSpec(1, "a", "a")])
        out = state.apply_pol_unitary("a", hwp_matrix(math.pi / 4), Band.IDLER)
        # the signal photon at "a" stays V; only the idler flipped
        assert out.amplitude(pair("a", V, M1, "a", H, M1)) == pytest.approx(-1.0)

    def test_tags_preserved(self):
        state = two_source_state()
        out = state.apply_pol_unitary("r", hwp_matrix(0.3))
        assert out.tags_present() <= state.tags_present()


class TestRelabelPath:
    def test_band_filtered_relabel(self):
        state = initial_state([SourceSpec(1, "a", "a")])
        out = state.relabel_path("a", "b", band=Band.SIGNAL)
        assert out.amplitude(pair("b", V, M1, "a", V, M1)) == 1 + 0j

    def test_no_matching_modes_is_identity(self):
        state = two_source_state()
        assert state.relabel_path("zz", "q") == state

    def test_collision_sums_amplitudes(self):
        state = BiphotonState(
            {
                pair("a", V, M1, "x", V, M1): 0.5,
                pair("b", V, M1, "x", V, M1): 0.25j,
            }
        )
        out = state.relabel_path("b", "a", band=Band.SIGNAL)
        assert len(out) == 1
        assert out.amplitude(pair("a", V, M1, "x", V, M1)) == pytest.approx(0.5 + 0.25j)

    def test_injective_relabel_preserves_norm(self):
        state = two_source_state()
        out = state.relabel_path("a", "fresh")
        assert out.norm_sq() == pytest.approx(state.norm_sq(), abs=1e-12)


class TestPrune:
    def test_tiny_amplitude_removed(self):
        state = BiphotonState({pair("a", V, M1, "a", V, M1): 1e-16})
        assert len(state) == 0

    def test_small_but_real_amplitude_kept(self):
        state = BiphotonState({pair("a", V, M1, "a", V, M1): 1e-3})
        assert len(state) == 1

    def test_empty_state_noop(self):
        assert len(BiphotonState().prune()) == 0

    def test_custom_epsilon(self):
        amps = {pair("a", V, M1, "a", V, M1): 1e-6}
        assert len(BiphotonState(amps, prune_epsilon=1e-5)) == 0
        assert len(BiphotonState(amps, prune_epsilon=1e-7)) == 1


class TestSerialization:
    def test_golden_two_source(self):
        assert two_source_state().serialize() == (
            "a,V,1|a,V,1|1,0\n"
            "r,V,2|r,V,2|1,0"
        )

    def test_serialization_is_canonically_ordered(self):
        entries = {
            pair("r", V, M2, "r", V, M2): 1.0,
            pair("a", H, MM, "b", V, M1): 0.5j,
            pair("a", V, MM, "b", V, M1): 0.25,
        }
        lines = BiphotonState(entries).serialize().splitlines()
        assert lines == [
            "a,H,M|b,V,1|0,0.5",
            "a,V,M|b,V,1|0.25,0",
            "r,V,2|r,V,2|1,0",
        ]

    def test_determinism_bit_identical(self):
        a = two_source_state().apply_pol_unitary("r", hwp_matrix(0.7))
        b = two_source_state().apply_pol_unitary("r", hwp_matrix(0.7))
        assert a.serialize() == b.serialize()


def test_operations_do_not_mutate_input():
    state = two_source_state()
    before = state.serialize()
    state.apply_pol_unitary("a", hwp_matrix(1.1))
    state.relabel_path("a", "zzz")
    state.prune()
    assert state.serialize() == before


# -- property tests ----------------------------------------------------------

def su2(theta: float, phi: float, lam: float) -> np.ndarray:
    return np.array(
        [
            [math.cos(theta), -cmath.exp(1j * lam) * math.sin(theta)],
            [cmath.exp(1j * phi) * math.sin(theta),
             cmath.exp(1j * (phi + lam)) * math.cos(theta)],
        ]
    )


PAIRS = [
    pair(sp, spol, stag, ip, ipol, itag)
    for sp in ("p", "q")
    for ip in ("p", "w")
    for spol in (H, V)
    for ipol in (H, V)
    for stag in (M1, MM)
    for itag in (M2, MM)
]

amplitudes = st.complex_numbers(
    min_magnitude=1e-6, max_magnitude=2.0, allow_nan=False, allow_infinity=False
)
states = st.dictionaries(st.sampled_from(PAIRS), amplitudes, min_size=1, max_size=8)
angles = st.floats(0, 2 * math.pi, allow_nan=False)


@given(entries=states, theta=angles, phi=angles, lam=angles,
       path=st.sampled_from(["p", "w"]),
       band=st.sampled_from([None, Band.SIGNAL, Band.IDLER]))
def test_unitary_preserves_norm(entries, theta, phi, lam, path, band):
    state = BiphotonState(entries)
    out = state.apply_pol_unitary(path, su2(theta, phi, lam), band)
    assert out.norm_sq() == pytest.approx(state.norm_sq(), rel=1e-12, abs=1e-12)


@given(e1=states, e2=states, theta=angles, phi=angles, lam=angles)
def test_unitary_is_linear(e1, e2, theta, phi, lam):
    u = su2(theta, phi, lam)
    summed: dict = dict(e1)
    for k, v in e2.items():
        summed[k] = summed.get(k, 0j) + v
    lhs = BiphotonState(summed).apply_pol_unitary("p", u)
    a = BiphotonState(e1).apply_pol_unitary("p", u)
    b = BiphotonState(e2).apply_pol_unitary("p", u)
    rhs: dict = {k: v for k, v in a.items()}
    for k, v in b.items():
        rhs[k] = rhs.get(k, 0j) + v
    for k, v in lhs.items():
        assert v == pytest.approx(rhs.get(k, 0j), abs=1e-12)
    for k, v in rhs.items():
        assert lhs.amplitude(k) == pytest.approx(v, abs=1e-12)


@given(entries=states, theta=angles, phi=angles, lam=angles)
def test_tag_multiset_never_grows(entries, theta, phi, lam):
    state = BiphotonState(entries)
    out = state.apply_pol_unitary("p", su2(theta, phi, lam))
    out = out.relabel_path("w", "p", band=Band.IDLER)
    assert out.tags_present() <= state.tags_present()


def test_amplitude_of_absent_pair_is_zero():
    state = two_source_state()
    absent = pair("nowhere", H, MM, "a", V, M1)
    assert state.amplitude(absent) == 0j
