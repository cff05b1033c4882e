from .peaks import RRSeries, detect_r_peaks
from .features import time_domain, frequency_domain, poincare, asymmetry, fragmentation
from .complexity import entropy_suite, fractal_suite, mfdfa_alpha1, rqa

__all__ = [
    "RRSeries", "detect_r_peaks",
    "time_domain", "frequency_domain", "poincare", "asymmetry", "fragmentation",
    "entropy_suite", "fractal_suite", "mfdfa_alpha1", "rqa",
]
