import numpy as np


def zscores(values):
    arr = np.asarray(values, dtype=float)
    return (arr - arr.mean()) / arr.std()
