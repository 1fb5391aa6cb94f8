"""Shared fixtures: small synthetic scenes and a solved reference pair."""

import numpy as np
import pytest

import acfocal as af


@pytest.fixture(scope="session")
def clean_scene():
    """Default-geometry scene, exact measurements, 4 samples per plane."""
    return af.generate(af.SceneConfig(seed=3, samples_per_plane=4))


@pytest.fixture(scope="session")
def clean_pair(clean_scene):
    """A cross-plane correspondence pair from the clean scene."""
    acs = clean_scene.clean
    return acs[0], acs[5]


@pytest.fixture(scope="session")
def true_candidate(clean_scene, clean_pair):
    """Candidate from the clean pair closest to the ground-truth focal."""
    cands = af.solve_two_ac(*clean_pair)
    return min(cands, key=lambda c: abs(c.focal - clean_scene.focal))


def cross_plane_pairs():
    """Deterministic index pairs spanning different planes (4 per plane)."""
    return [(0, 5), (1, 6), (2, 7), (3, 4), (0, 6), (1, 7), (2, 5), (3, 6),
            (0, 7), (1, 4), (0, 1), (4, 5)]
