"""Toolkit for measuring how summary authors distribute conceptual engagement
across long narratives: corpus ingestion, LLM sentence-to-chapter alignment,
gold evaluation, and the engagement/style/statistics metric suites."""

from .aligner import (AlignerConfig, AlignmentGraph, EmbeddingTable,
                      align_embedding, align_llm, align_tfidf,
                      parse_alignment_response)
from .align_eval import GoldAlignment, adjudicate, cohen_kappa, pooled_prf1, prf1
from .corpus import (Chapter, Novel, SegmentationConfig, Summary,
                     SummarySentence, count_tokens, load_corpus,
                     segment_chapters, split_sentences, tokenize)
from .engagement_metrics import (EngagementMetrics, HeatmapMatrix, avg_match,
                                 chapters_per_sentence, compute_engagement,
                                 heatmap, kendall_tau_b, linearity,
                                 prop_skipped, sentences_per_chapter, skew)
from .gateway import ChatRequest, ChatResponse, Transport, complete
from .prompts import render_alignment_prompt, render_generation_prompt
from .stats import (AggregateCell, ComparisonReport, MetricRecord, aggregate,
                    bh_adjust, compare_to_human, ks_pvalue, ks_statistic,
                    mean_se)
from .style_metrics import (AnnotatedSentence, Entity, StyleMetrics, Token,
                            bleu, compute_style, cross_novel_bleu_baseline,
                            dependency_distance, entity_density,
                            load_annotations)

__version__ = "0.1.0"
