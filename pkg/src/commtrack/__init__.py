"""Track evolving communities in snapshot series and compare tracking methods."""
from .benchmark import PlantedParams, PlantedScenario, generate_planted, recovery_rate
from .detection import (Community, CommunityLayer, detect_cpm, detect_modularity, load_communities,
                        make_layer, write_communities)
from .errors import CommtrackError, ConfigError, DataError, DegenerateFitError
from .evaluation import EvaluationReport, align_origins, apcc, apnp, evaluate, pearson_normalized
from .pipeline import PipelineConfig, run_pipeline
from .similarity import (SimilarityMatrix, inclusion, jaccard, modec, modified_jaccard, mutual,
                         score_all_pairs, transition_vectors)
from .temporal import Snapshot, TemporalNetwork, degree_within, from_edge_lists, load_snapshots
from .thresholding import MixtureFit, Threshold, fit_mixture, junction_point
from .tracking import (EvolvingSequence, Event, TrackerConfig, classify_events, track_ged, track_greene,
                       track_tajeuna, track_takaffoli)

__version__ = "0.1.0"

__all__ = [
    "align_origins", "apcc", "apnp", "classify_events", "CommtrackError", "Community", "CommunityLayer",
    "ConfigError", "DataError", "DegenerateFitError", "degree_within", "detect_cpm", "detect_modularity",
    "evaluate", "EvaluationReport", "Event", "EvolvingSequence", "fit_mixture", "from_edge_lists",
    "generate_planted", "inclusion", "jaccard", "junction_point", "load_communities", "load_snapshots",
    "make_layer", "MixtureFit", "modec", "modified_jaccard", "mutual", "pearson_normalized",
    "PipelineConfig", "PlantedParams", "PlantedScenario", "recovery_rate", "run_pipeline", "score_all_pairs",
    "SimilarityMatrix", "Snapshot", "TemporalNetwork", "Threshold", "track_ged", "track_greene",
    "track_tajeuna", "track_takaffoli", "TrackerConfig", "transition_vectors", "write_communities",
]
