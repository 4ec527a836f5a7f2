"""Neighbourhood cultural capital from geo-tagged, user-tagged media records."""

from .concept_graph import ConceptGraph, classify_community, load_concept_graph, neighbors_1hop
from .errors import (
    CulturankError, DegenerateError, EmptySampleError, GeometryError, InsufficientDataError,
    IntegrityError, ParseError, SingularDesignError, UndefinedMetricError, UnknownKeyError,
)
from .ingest import (
    CensusTable, MediaRecord, Neighborhood, assign_location, cultural_filter, load_census,
    load_neighborhoods, load_records, local_user_filter,
)
from .lexsim import (
    UNREACHABLE, LexGraph, avg_pair_similarity, graph_depth, path_similarity, shortest_len,
)
from .metrics import (
    CapitalVector, LocationStats, category_capital, cultural_capital, detect_events, diversity,
    economic_capital, fraction_cultural, miller_madow, monthly_capital, penetration,
    specialization, zscore,
)
from .normalize import normalize_term
from .stats import (
    Design, RegressionResult, delta, model_category_house, model_development,
    model_house_price, ols_fit, pearson,
)
from .taxonomy import (
    Taxonomy, agreement_clean, apply_isa_decisions, apply_threshold, attach_terms,
    expand_subcategories, match_tags, mine_cooccurrences, seed_categories, silhouette,
    threshold_sweep,
)

__version__ = "0.1.0"
