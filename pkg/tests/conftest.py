"""Shared fixtures: the battery of small exactly-enumerable distributions."""

from __future__ import annotations

import pathlib
from dataclasses import dataclass

import numpy as np
import pytest

import unmasking as um

SPECS_DIR = pathlib.Path(__file__).resolve().parent.parent / "specs"


def random_pmf(n: int, q: int, seed: int, alpha: float = 1.0) -> um.JointPMF:
    """A Dirichlet(alpha) draw on the q**n simplex."""
    rng = np.random.default_rng(seed)
    return um.JointPMF(n, q, rng.dirichlet(np.full(q**n, alpha)))


def product_pmf(rows: list[list[float]]) -> um.JointPMF:
    """Independent coordinates with the given per-coordinate laws."""
    rows_arr = np.asarray(rows, dtype=float)
    spec = um.ProductMixtureSpec(weights=np.array([1.0]), components=rows_arr[None, :, :])
    return um.product_mixture(spec)


@dataclass(frozen=True)
class BatteryMember:
    name: str
    pmf: um.JointPMF
    curve: um.InfoCurve
    summary: um.CorrelationSummary


def _battery_pmfs() -> list[tuple[str, um.JointPMF]]:
    mixture = um.product_mixture(
        um.ProductMixtureSpec(
            weights=np.array([0.6, 0.4]),
            components=np.array(
                [
                    [[0.9, 0.1], [0.8, 0.2], [0.7, 0.3]],
                    [[0.2, 0.8], [0.3, 0.7], [0.4, 0.6]],
                ]
            ),
        )
    )
    pair = um.JointPMF(2, 2, np.array([0.5, 0.0, 0.0, 0.5]))
    skewed = np.full(8, 1e-3)
    skewed[0] = 1.0 - skewed[1:].sum()
    return [
        ("uniform_q2_n4", um.uniform_dist(2, 4)),
        ("uniform_q3_n3", um.uniform_dist(3, 3)),
        ("product_biased", product_pmf([[0.75, 0.25], [0.5, 0.5], [0.9, 0.1], [0.6, 0.4]])),
        ("pair_correlated", pair),
        ("repetition_q2_n3", um.code_dist(um.AffineCode(2, np.array([[1, 1, 1]]), np.zeros(3, int)))),
        ("identity_q2_n3", um.code_dist(um.AffineCode(2, np.eye(3, dtype=int), np.zeros(3, int)))),
        ("zero_column_code", um.code_dist(um.AffineCode(2, np.array([[1, 0]]), np.zeros(2, int)))),
        ("rs_q7_n5_k2", um.code_dist(um.rs_code(7, 2, range(5)))),
        ("rs_q5_n4_k2", um.code_dist(um.rs_code(5, 2, range(4)))),
        ("mixture_asymmetric", mixture),
        ("elevated_pair_rs3", um.elevated_family(pair, um.rs_code(3, 1, range(2)))),
        ("dirichlet_n5_q2", random_pmf(5, 2, seed=11)),
        ("dirichlet_n4_q3", random_pmf(4, 3, seed=12)),
        ("dirichlet_spiky_n6_q2", random_pmf(6, 2, seed=13, alpha=0.3)),
        ("near_deterministic", um.JointPMF(3, 2, skewed)),
    ]


@pytest.fixture(scope="session")
def zoo_battery() -> list[BatteryMember]:
    members = []
    for name, pmf in _battery_pmfs():
        curve = um.info_curve_exact(pmf, memoize=True)
        members.append(BatteryMember(name, pmf, curve, um.tc_dtc_from_curve(curve)))
    return members


@pytest.fixture(scope="session")
def specs_dir() -> pathlib.Path:
    return SPECS_DIR
