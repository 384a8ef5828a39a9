import numpy as np
import pytest

from ddmod import AfdmParams, Scheme, generate_basis, make_frame_config

ALL_SCHEMES = list(Scheme)
AFDM_REF = AfdmParams(delta_num=8, c2=0.0)


@pytest.fixture(scope="session")
def cfg_ref():
    """Reference desk-scale frame: M=13, N=16, 30 kHz spacing."""
    return make_frame_config(13, 16, 30e3)


@pytest.fixture(scope="session")
def cfg_small():
    return make_frame_config(4, 4, 1e3)


@pytest.fixture(scope="session")
def bases_ref(cfg_ref):
    return {s: generate_basis(s, cfg_ref, AFDM_REF) for s in ALL_SCHEMES}


@pytest.fixture(scope="session")
def bases_small(cfg_small):
    return {s: generate_basis(s, cfg_small, AFDM_REF) for s in ALL_SCHEMES}
