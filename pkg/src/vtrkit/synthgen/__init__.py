"""Procedural shots and audio, planted label policies and corpus tooling."""
from .audio import MOODS, AudioTrack, estimate_tempo, generate_audio
from .corpus import (MANIFEST_NAME, CorpusConfig, CorpusManifest, SampleRecord, build_corpus,
                     config_digest, corpus_stats, filter_corpus, format_stats, record_violations,
                     render_record, split_corpus)
from .policy import (GENTLE, POLICIES, category_prior, deterministic_labels, rule_label,
                     sample_transition_labels)
from .scenes import BRIGHTNESS, MOTIONS, PANS, SceneSpec, generate_shot

__all__ = [
    "AudioTrack", "BRIGHTNESS", "CorpusConfig", "CorpusManifest", "GENTLE", "MANIFEST_NAME", "MOODS",
    "MOTIONS", "PANS", "POLICIES", "SampleRecord", "SceneSpec", "build_corpus", "category_prior",
    "config_digest", "corpus_stats", "deterministic_labels", "estimate_tempo", "filter_corpus",
    "format_stats", "generate_audio", "generate_shot", "record_violations", "render_record",
    "rule_label", "sample_transition_labels", "split_corpus",
]
