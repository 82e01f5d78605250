import os

# Keep test runs from writing rotating log files into the repo
os.environ.setdefault("UT_LOG_TO_FILE", "false")

import pytest

from app.dist.service import UnitTeissier
from app.data_ingestion.service import parse_dataset


# (theta, n, r, mean, second moment, variance) as printed to 5 decimals
ORDER_STAT_TABLE = [
    (1.0, 1, 1, 0.40365, 0.19269, 0.02976),
    (1.0, 2, 1, 0.30731, 0.10805, 0.01361),
    (1.0, 2, 2, 0.50000, 0.27734, 0.02734),
    (1.0, 3, 1, 0.26651, 0.07939, 0.00836),
    (1.0, 3, 2, 0.38889, 0.16536, 0.01413),
    (1.0, 3, 3, 0.55556, 0.33333, 0.02469),
    (1.0, 4, 1, 0.24308, 0.06506, 0.00597),
    (1.0, 4, 2, 0.33681, 0.12239, 0.00895),
    (1.0, 4, 3, 0.44097, 0.20833, 0.01388),
    (1.0, 4, 4, 0.59375, 0.37500, 0.02246),
    (1.0, 5, 1, 0.22747, 0.05638, 0.00464),
    (1.0, 5, 2, 0.30554, 0.09976, 0.00641),
    (1.0, 5, 3, 0.38371, 0.15633, 0.00910),
    (1.0, 5, 4, 0.47915, 0.24300, 0.01342),
    (1.0, 5, 5, 0.62240, 0.40800, 0.02062),
    (2.0, 1, 1, 0.62106, 0.40365, 0.01793),
    (2.0, 2, 1, 0.54480, 0.30731, 0.01050),
    (2.0, 2, 2, 0.69733, 0.50000, 0.01373),
    (2.0, 3, 1, 0.50895, 0.26651, 0.00748),
    (2.0, 3, 2, 0.61649, 0.38889, 0.00883),
    (2.0, 3, 3, 0.73775, 0.55556, 0.01128),
    (2.0, 4, 1, 0.48701, 0.24308, 0.00590),
    (2.0, 4, 2, 0.57478, 0.33681, 0.00644),
    (2.0, 4, 3, 0.65820, 0.44097, 0.00774),
    (2.0, 4, 4, 0.76426, 0.59375, 0.00965),
    (2.0, 5, 1, 0.47173, 0.22747, 0.00494),
    (2.0, 5, 2, 0.54813, 0.30554, 0.00509),
    (2.0, 5, 3, 0.61474, 0.38371, 0.00580),
    (2.0, 5, 4, 0.68718, 0.47915, 0.00693),
    (2.0, 5, 5, 0.78353, 0.62240, 0.00848),
    (3.0, 1, 1, 0.72416, 0.53535, 0.01094),
    (3.0, 2, 1, 0.66445, 0.44843, 0.00693),
    (3.0, 2, 2, 0.78387, 0.62227, 0.00782),
    (3.0, 3, 1, 0.63543, 0.40894, 0.00518),
    (3.0, 3, 2, 0.72249, 0.52739, 0.00540),
    (3.0, 3, 3, 0.81456, 0.66971, 0.00620),
    (3.0, 4, 1, 0.61730, 0.38527, 0.00421),
    (3.0, 4, 2, 0.68981, 0.47995, 0.00412),
    (3.0, 4, 3, 0.75517, 0.57482, 0.00454),
    (3.0, 4, 4, 0.83436, 0.70133, 0.00519),
    (3.0, 5, 1, 0.60450, 0.36903, 0.00361),
    (3.0, 5, 2, 0.66851, 0.45027, 0.00336),
    (3.0, 5, 3, 0.72175, 0.52448, 0.00355),
    (3.0, 5, 4, 0.77745, 0.60838, 0.00396),
    (3.0, 5, 5, 0.84858, 0.72457, 0.00448),
    (4.0, 1, 1, 0.78347, 0.62106, 0.00724),
    (4.0, 2, 1, 0.73486, 0.54480, 0.00477),
    (4.0, 2, 2, 0.83207, 0.69733, 0.00499),
    (4.0, 3, 1, 0.71085, 0.50895, 0.00364),
    (4.0, 3, 2, 0.78289, 0.61649, 0.00357),
    (4.0, 3, 3, 0.85666, 0.73775, 0.00389),
    (4.0, 4, 1, 0.69570, 0.48701, 0.00301),
    (4.0, 4, 2, 0.75630, 0.57478, 0.00279),
    (4.0, 4, 3, 0.80948, 0.65820, 0.00294),
    (4.0, 4, 4, 0.87238, 0.76426, 0.00321),
    (4.0, 5, 1, 0.68493, 0.47173, 0.00261),
    (4.0, 5, 2, 0.73880, 0.54813, 0.00231),
    (4.0, 5, 3, 0.78255, 0.61474, 0.00235),
    (4.0, 5, 4, 0.82744, 0.68718, 0.00253),
    (4.0, 5, 5, 0.88362, 0.78353, 0.00275),
]

# theta -> (lambda1, lambda2, lambda3, lambda4, L-CV, tau3, tau4)
L_MOMENT_TABLE = {
    1.0: (0.40365, 0.09635, 0.01476, 0.00954, 0.23869, 0.15323, 0.09904),
    2.0: (0.62106, 0.07626, 0.00457, 0.00674, 0.12280, 0.05997, 0.08838),
    3.0: (0.72416, 0.05971, 0.00167, 0.00524, 0.08245, 0.02797, 0.08781),
    4.0: (0.78347, 0.04860, 0.00057, 0.00428, 0.06203, 0.01183, 0.08811),
}

# UT line of the insurance-premium fit: value and tolerance
RISK73_FIT = {
    "theta_hat": (0.3493, 0.0005),
    "std_error": (0.0155, 0.001),
    "neg_loglik": (-88.5397, 0.01),
    "aic": (-175.0790, 0.02),
    "caic": (-175.0231, 0.02),
    "bic": (-172.7889, 0.02),
    "hqic": (-174.1666, 0.02),
    "ks": (0.1033, 0.0005),
    "ks_pvalue": (0.4171, 0.01),
}
# Normal-scores W* and A* of the published row, relative tolerance 2%
RISK73_EDF = {"w_star": 0.2220, "a_star": 1.4132}
# Plain W2 and A2 on the fitted probabilities at theta = 0.3493
RISK73_PLAIN_EDF = {"w2": 0.17977, "a2": 1.21933}

METHOD_ORDER = ["MLE", "LSE", "WLSE", "CRVME", "MPSE", "PCE", "ADE", "RADE", "LME"]

# theta = 0.26, n = 30 cell of the simulation tables
THETA026_N30 = {
    "bias": [0.01464, 0.01813, 0.01691, 0.01831, 0.01528, 0.04836, 0.01736, 0.02023, 0.00408],
    "mse": [0.00035, 0.00053, 0.00046, 0.00054, 0.00035, 0.00445, 0.00048, 0.00068, 0.00199],
    "mre": [0.05630, 0.06974, 0.06503, 0.07041, 0.05875, 0.18599, 0.06675, 0.07779, 0.01570],
    "mse_ranks": [1.5, 5, 3, 6, 1.5, 9, 4, 7, 8],
    "partial_ranks": [1, 6, 4, 7, 2, 9, 5, 8, 3],
}

# Summed partial ranks over the full published design and their overall ranks
OVERALL_TOTALS = {
    "MLE": 66.5, "LSE": 347.0, "WLSE": 243.5, "CRVME": 348.0, "MPSE": 92.0,
    "PCE": 340.5, "ADE": 232.0, "RADE": 435.0, "LME": 145.5,
}
OVERALL_RANKS = {
    "MLE": 1, "LSE": 7, "WLSE": 5, "CRVME": 8, "MPSE": 2,
    "PCE": 6, "ADE": 4, "RADE": 9, "LME": 3,
}


@pytest.fixture
def ut1():
    return UnitTeissier(1.0)


@pytest.fixture(scope="session")
def risk73():
    return parse_dataset("risk73")


@pytest.fixture(scope="session")
def risk73_sample(risk73):
    return risk73.to_sample()
