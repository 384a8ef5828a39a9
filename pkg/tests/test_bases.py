import numpy as np
import pytest

from ddmod import (AfdmParams, Scheme, change_of_basis, generate_basis,
                   gram_matrix, load_basis, make_frame_config, save_basis)
from ddmod.bases import Basis

from conftest import AFDM_REF, ALL_SCHEMES


@pytest.mark.parametrize("m,n", [(13, 16), (4, 4), (3, 8)])
@pytest.mark.parametrize("scheme", ALL_SCHEMES)
def test_unitarity(scheme, m, n):
    cfg = make_frame_config(m, n, 15e3)
    basis = generate_basis(scheme, cfg, AFDM_REF)
    gram = gram_matrix(basis)
    assert np.max(np.abs(gram - np.eye(cfg.mn))) < 1e-10
    assert np.allclose(np.linalg.norm(basis.carriers, axis=0), 1.0, atol=1e-12)


def test_zak_carrier_is_pulse_train(cfg_ref, bases_ref):
    phi0 = bases_ref[Scheme.ZAK_OTFS].carriers[:, 0]
    train = np.arange(0, cfg_ref.mn, cfg_ref.m)
    assert np.allclose(phi0[train], 1 / np.sqrt(16))
    mask = np.ones(cfg_ref.mn, bool)
    mask[train] = False
    assert np.all(phi0[mask] == 0)


def test_ofdm_carrier_is_chunk_indicator(cfg_ref, bases_ref):
    phi0 = bases_ref[Scheme.OFDM].carriers[:, 0]
    assert np.allclose(phi0[:13], 1 / np.sqrt(13))
    assert np.all(phi0[13:] == 0)


def test_otsm_requires_power_of_two_doppler_bins():
    cfg = make_frame_config(13, 12, 30e3)
    with pytest.raises(ValueError):
        generate_basis(Scheme.OTSM, cfg)


def test_afdm_requires_params(cfg_ref):
    with pytest.raises(ValueError):
        generate_basis(Scheme.AFDM, cfg_ref, None)


@pytest.mark.parametrize("delta,c2", [(8, 0.0), (1, 0.37), (24, -1.2), (0.5, 0.5)])
def test_afdm_orthonormal_for_any_parameters(cfg_ref, delta, c2):
    # the quadratic chirp term cancels in inner products, so orthonormality
    # holds for every delta (including the half-integer chirp rate) and c2
    basis = generate_basis(Scheme.AFDM, cfg_ref, AfdmParams(delta, c2))
    assert np.max(np.abs(gram_matrix(basis) - np.eye(cfg_ref.mn))) < 1e-10


def test_oddm_equals_zak(cfg_ref, bases_ref):
    dev = np.max(np.abs(bases_ref[Scheme.ODDM].carriers
                        - bases_ref[Scheme.ZAK_OTFS].carriers))
    assert dev < 1e-12


def test_gram_detects_duplicated_column(cfg_small, bases_small):
    carriers = bases_small[Scheme.OFDM].carriers.copy()
    carriers[:, 1] = carriers[:, 0]
    broken = Basis(Scheme.OFDM, cfg_small, carriers)
    gram = gram_matrix(broken)
    assert abs(gram[0, 1]) == pytest.approx(1.0, abs=1e-12)


def test_zak_micro_frame_exact_identity():
    # hand-computable 2-point DFT columns; exact up to exp(j*pi) rounding
    cfg = make_frame_config(1, 2, 1.0)
    basis = generate_basis(Scheme.ZAK_OTFS, cfg)
    expected = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert np.max(np.abs(basis.carriers - expected)) < 1e-15
    assert np.max(np.abs(gram_matrix(basis) - np.eye(2))) < 1e-15


def test_change_of_basis_oddm_zak_identity(bases_ref, cfg_ref):
    u = change_of_basis(bases_ref[Scheme.ODDM], bases_ref[Scheme.ZAK_OTFS])
    assert np.max(np.abs(u - np.eye(cfg_ref.mn))) < 1e-12


@pytest.mark.parametrize("scheme", ALL_SCHEMES)
def test_change_of_basis_self_identity(bases_small, cfg_small, scheme):
    u = change_of_basis(bases_small[scheme], bases_small[scheme])
    assert np.max(np.abs(u - np.eye(cfg_small.mn))) < 1e-10


def test_change_of_basis_unitary_and_residue_blocks(bases_ref, cfg_ref):
    u = change_of_basis(bases_ref[Scheme.OTSM], bases_ref[Scheme.ZAK_OTFS])
    assert np.max(np.abs(u.conj().T @ u - np.eye(cfg_ref.mn))) < 1e-10
    idx = np.arange(cfg_ref.mn)
    off = (idx[:, None] % cfg_ref.m) != (idx[None, :] % cfg_ref.m)
    assert np.max(np.abs(u[off])) < 1e-12


def test_change_of_basis_config_mismatch(bases_ref):
    other = generate_basis(Scheme.ZAK_OTFS, make_frame_config(4, 4, 30e3))
    with pytest.raises(ValueError):
        change_of_basis(bases_ref[Scheme.ODDM], other)


def test_scheme_parse():
    assert Scheme.parse("Zak-OTFS") is Scheme.ZAK_OTFS
    assert Scheme.parse("ofdm") is Scheme.OFDM
    with pytest.raises(ValueError):
        Scheme.parse("cdma")


def test_basis_file_round_trip(tmp_path, bases_small, cfg_small):
    basis = bases_small[Scheme.ZAK_OTFS]
    path = tmp_path / "zak.ddmb"
    save_basis(basis, path)
    raw = path.read_bytes()
    assert raw[:4] == b"DDMB"
    assert int.from_bytes(raw[4:8], "little") == cfg_small.mn
    assert len(raw) == 16 + cfg_small.mn * cfg_small.mn * 8
    loaded = load_basis(path)
    assert np.max(np.abs(loaded - basis.carriers)) < 1e-6  # complex64 storage


def test_basis_file_bad_magic(tmp_path):
    path = tmp_path / "bad.ddmb"
    path.write_bytes(b"NOPE" + bytes(12) + bytes(128))
    with pytest.raises(ValueError):
        load_basis(path)


def test_basis_file_truncated(tmp_path, bases_small):
    path = tmp_path / "trunc.ddmb"
    save_basis(bases_small[Scheme.OFDM], path)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        load_basis(path)
