"""Latent-variable private information retrieval for a single database."""

from .audit import AuditReport, SampledAuditReport, audit_exact, audit_sampled
from .errors import (LVPIRError, NotInQueryError, ParseError, ShapeError, StochasticityError,
                     TooLargeError, TooManyQueriesError, WireError)
from .model import (CharMatrix, LatentDistribution, QuerySet, format_matrix, load_matrix,
                    parse_matrix, posterior_given_query, prior_s)
from .planner import (CostReport, PlannerConfig, SchemePlan, column_rank, detect_groups,
                      plan_best, plan_grouping, solve_exhaustive, validate_plan)
from .privacy import ValidSubsetCatalog, enumerate_valid_subsets, is_private_subset
from .protocol import (Answer, Client, Database, RetrievalTranscript, Server, answer, decode,
                       measure_average_cost, retrieve, sample_query)
from .rng import SplitMix64

__version__ = "0.1.0"
