from .dataset import Dataset, SparseEncoding
from .experiment import BenchConfig, ExperimentConfig, Table2Config, WeakRecoveryConfig
from .generative import Alphabet, GenerativeModel, LinTerm, Nonlinearity, QuadPoly, QuadTerm
from .oracle import MeasureCheck, UspEntry, UspReport, ValueProfile
from .regression import CVResult, ExpandedDesign, FitResult, Term
from .screening import HashAggregate, HashFamily, NonlinearScores, ScoreVector, ScreenConfig, ScreenMode
from .support import PairCheck, StrongSupport, SupportReport

__all__ = [
    "Alphabet", "BenchConfig", "CVResult", "Dataset", "ExpandedDesign", "ExperimentConfig",
    "FitResult", "GenerativeModel", "HashAggregate", "HashFamily", "LinTerm", "MeasureCheck",
    "Nonlinearity", "NonlinearScores", "PairCheck", "QuadPoly", "QuadTerm", "ScoreVector",
    "ScreenConfig", "ScreenMode", "SparseEncoding", "StrongSupport", "SupportReport", "Table2Config", "Term",
    "UspEntry", "UspReport", "ValueProfile", "WeakRecoveryConfig",
]
