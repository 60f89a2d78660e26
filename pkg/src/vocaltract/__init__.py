"""LPC vocal-tract analysis and styled-speech speaker identification."""

__version__ = "0.1.0"

from .cepstra import lpc_to_cepstrum, waveform_features
from .dtw import DtwConfig, dtw_distance, dtw_identify
from .evaluation import ExperimentConfig, StyleReport, displacement_summary, run_experiment
from .exceptions import (
    AreaFileError,
    RootFindingError,
    SingularRecursionError,
    UnstablePolynomialError,
    VocalTractError,
    WavFormatError,
)
from .formants import Formant, FormantSet, Pole, extract_formants, formant_displacement, polynomial_roots
from .hmm import Codebook, HmmModel, baum_welch_train, forward_log_likelihood, hmm_identify, quantize, train_codebook
from .lpc import (
    PredictorPolynomial,
    area_to_predictor,
    area_to_reflection,
    levinson_durbin,
    predictor_to_reflection,
    reflection_to_predictor,
)
from .signals import Waveform, frame, pre_emphasize, read_wav, write_wav
from .style import STYLES, StyleProfile, TalkingStyle, generate_corpus, load_corpus, save_corpus

__all__ = [name for name in dir() if not name.startswith("_")]
