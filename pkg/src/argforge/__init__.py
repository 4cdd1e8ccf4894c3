"""Corpus construction and evaluation toolkit for aspect-controlled argument generation."""

from .aspects import (AspectCandidate, AspectSpan, bio_decode, bio_encode, extract_candidates,
                      filter_candidates, heuristic_score, load_aspect_dataset, recall_at_k,
                      token_f1_macro, top_t)
from .clients import BaselineClient, GenerationRequest, HttpClient, Label, QualityScore, make_client
from .counter import CounterRequest, build_counter_codes, flip_stance, generate_counters
from .evaluation import (ReferenceSet, aspect_frequency, aspect_presence, meteor_lite, presence_rate,
                         quality_report, reference_grouped_eval, rouge_l, stance_correctness_report)
from .ingest import (Document, Sentence, dedup, eval_query, format_query, parse_query, retrieve,
                     split_sentences, topic_filter)
from .pipeline import PipelineConfig, run_pipeline, validate_config
from .report import EvalReport
from .traindoc import (Argument, ControlCode, TrainingDocument, apply_bounds, chunk_document,
                       group_arguments, render_control_code, stem_key)

__version__ = "0.1.0"
