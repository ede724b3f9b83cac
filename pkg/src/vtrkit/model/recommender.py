"""Multi-modal transformer that turns shot sequences into per-transition queries.

Token layout: shots are interleaved, one token per enabled modality per
shot, ``[v_0, a_0, v_1, a_1, ...]``. Every token at shot position ``s``
receives the same positional parameter row ``pos_embedding[s]`` plus the
modal embedding of its modality. Padded slots are zero vectors and are
masked out of attention.
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import torch
from torch import nn

from .config import ModelConfig
from .encoders import AudioEncoder, VisualEncoder
from .table import TransitionEmbeddingTable

VISUAL, AUDIO = 0, 1


@dataclass
class ShotBatch:
    """A padded batch of shot sequences.

    ``visual``/``audio`` are ``(B, S, ...)`` raw inputs or frozen-prefix caches
    (flagged by ``*_cached``). ``transitions`` lists ``(video, k)`` pairs: the
    boundary between shots ``k`` and ``k + 1`` of that video.
    """
    shot_mask: torch.Tensor
    transitions: torch.Tensor
    labels: torch.Tensor
    visual: Optional[torch.Tensor] = None
    audio: Optional[torch.Tensor] = None
    audio_mask: Optional[torch.Tensor] = None
    visual_cached: bool = False
    audio_cached: bool = False
    provenance: List = field(default_factory=list)

    def __len__(self):
        return len(self.labels)


class Recommender(nn.Module):
    def __init__(self, config: ModelConfig, table: Optional[TransitionEmbeddingTable] = None,
                 objective: str = "retrieval"):
        super().__init__()
        config.validate()
        if objective not in ("retrieval", "classification"):
            raise ValueError(f"unknown objective {objective!r}")
        self.config = config
        self.objective = objective
        self.modalities = [m for m in ("visual", "audio") if m in config.modalities]
        d = config.d_model

        if "visual" in self.modalities:
            self.visual_encoder = VisualEncoder(config.visual_channels, config.d_visual).freeze(config.freeze_stages)
            self.visual_proj = nn.Linear(config.d_visual, d)
        if "audio" in self.modalities:
            self.audio_encoder = AudioEncoder(config.sample_rate, config.n_mels, config.d_audio
                                              ).freeze(config.audio_freeze_stages)
            self.audio_proj = nn.Linear(config.d_audio, d)
        self.pos_embedding = nn.Parameter(torch.randn(config.max_shots, d) * 0.02)
        self.modal_embedding = nn.Parameter(torch.randn(2, d) * 0.02)
        layer = nn.TransformerEncoderLayer(d, config.n_head, config.dim_feedforward, config.dropout,
                                           batch_first=True)
        self.encoder = nn.TransformerEncoder(layer, config.n_layers, enable_nested_tensor=False)
        self.pool = nn.Linear(self.tokens_per_transition * d, config.d_transition)

        if objective == "retrieval":
            if table is None:
                raise ValueError("retrieval objective needs a transition embedding table")
            if table.dim != config.d_transition:
                raise ValueError(f"table dim {table.dim} != d_transition {config.d_transition}")
            if table.n_categories != config.n_categories:
                raise ValueError(f"table has {table.n_categories} rows, config expects {config.n_categories}")
            self.register_buffer("table", torch.tensor(table.embeddings, dtype=torch.float32))
            if config.use_projection:
                self.query_proj = nn.Linear(config.d_transition, config.d_matching)
                self.table_proj = nn.Linear(config.d_transition, config.d_matching)
            else:
                self.query_proj = nn.Identity()
                self.table_proj = nn.Identity()
        else:
            self.classifier = nn.Linear(config.d_transition, config.n_categories)

    @property
    def n_modalities(self):
        return len(self.modalities)

    @property
    def tokens_per_transition(self):
        if self.config.audio_token == "per_boundary" and "audio" in self.modalities:
            return 2 * (self.n_modalities - 1) + 1
        return 2 * self.n_modalities

    def _slot(self, shot, modality):
        return shot * self.n_modalities + self.modalities.index(modality)

    # -- encoders ---------------------------------------------------------
    @staticmethod
    def _encode(encoder, x, cached):
        B, S = x.shape[:2]
        flat = x.reshape(B * S, *x.shape[2:])
        feats = encoder.forward_cached(flat) if cached else encoder(flat)
        return feats.view(B, S, -1)

    def encode_shots(self, batch: ShotBatch):
        v = a = None
        if "visual" in self.modalities:
            v = self._encode(self.visual_encoder, batch.visual, batch.visual_cached)
        if "audio" in self.modalities:
            a = self._encode(self.audio_encoder, batch.audio, batch.audio_cached)
        return v, a

    # -- tokens -----------------------------------------------------------
    def positional_vector(self, position):
        """The parameter row added to every token at shot ``position``."""
        return self.pos_embedding[position]

    def assemble_tokens(self, visual_feats, audio_feats, shot_mask, audio_mask=None):
        """Project, add positional/modal embeddings and interleave.

        Returns ``(tokens (B, S*M, d), padding mask (B, S*M))`` with ``True`` at padding.
        """
        B, S = shot_mask.shape
        if S > self.config.max_shots:
            raise ValueError(f"{S} shots exceed the maximum of {self.config.max_shots}")
        per_boundary = self.config.audio_token == "per_boundary"
        if audio_mask is None:
            audio_mask = shot_mask
        pos = self.pos_embedding[:S].unsqueeze(0)
        streams, masks = [], []
        for m in self.modalities:
            if m == "visual":
                tok = self.visual_proj(visual_feats) + pos + self.modal_embedding[VISUAL]
                mask = shot_mask
            else:
                if per_boundary:
                    nxt = torch.cat([self.pos_embedding[1:S], self.pos_embedding[S - 1:S]], dim=0)
                    apos = 0.5 * (pos + nxt.unsqueeze(0))
                else:
                    apos = pos
                tok = self.audio_proj(audio_feats) + apos + self.modal_embedding[AUDIO]
                mask = audio_mask
            streams.append(tok * mask.unsqueeze(-1).to(tok.dtype))
            masks.append(mask)
        tokens = torch.stack(streams, dim=2).reshape(B, S * self.n_modalities, -1)
        real = torch.stack(masks, dim=2).reshape(B, S * self.n_modalities)
        return tokens, ~real

    def fuse_tokens(self, tokens, padding_mask):
        out = self.encoder(tokens, src_key_padding_mask=padding_mask)
        return out * (~padding_mask).unsqueeze(-1).to(out.dtype)

    def pool_transitions(self, contextual, transitions, shot_mask, audio_mask=None):
        """Concatenate the tokens either side of each boundary and project to ``d_transition``."""
        if audio_mask is None:
            audio_mask = shot_mask
        b, k = transitions[:, 0], transitions[:, 1]
        if not bool((shot_mask[b, k] & shot_mask[b, k + 1]).all()):
            raise ValueError("transition index refers to a padded shot")
        slots = []
        if self.config.audio_token == "per_boundary" and "audio" in self.modalities:
            if "visual" in self.modalities:
                slots += [self._slot(k, "visual"), self._slot(k + 1, "visual")]
            slots.append(self._slot(k, "audio"))
        else:
            for shot in (k, k + 1):
                slots += [self._slot(shot, m) for m in self.modalities]
        parts = [contextual[b, s] for s in slots]
        return self.pool(torch.cat(parts, dim=-1))

    # -- matching ---------------------------------------------------------
    def project_pair(self, e_video):
        return self.query_proj(e_video), self.table_proj(self.table)

    def forward(self, batch: ShotBatch):
        v, a = self.encode_shots(batch)
        tokens, pad = self.assemble_tokens(v, a, batch.shot_mask, batch.audio_mask)
        ctx = self.fuse_tokens(tokens, pad)
        e_video = self.pool_transitions(ctx, batch.transitions, batch.shot_mask, batch.audio_mask)
        if self.objective == "classification":
            return {"scores": self.classifier(e_video), "e_video": e_video}
        q, t = self.project_pair(e_video)
        return {"scores": q @ t.T, "e_video": e_video, "query": q, "table": t}


@dataclass
class RankedRecommendation:
    categories: np.ndarray  # category ids, best first
    scores: np.ndarray  # score of each entry in ``categories``

    def top(self, k):
        return list(zip(self.categories[:k].tolist(), self.scores[:k].tolist()))


def rank_scores(scores):
    """Category ids sorted by descending score, ties broken by ascending id."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.argsort(-scores, axis=-1, kind="stable")


def score_and_rank(e_video, projected_table) -> RankedRecommendation:
    e = np.asarray(e_video, dtype=np.float64)
    t = np.asarray(projected_table, dtype=np.float64)
    if e.shape[-1] != t.shape[-1]:
        raise ValueError(f"query dim {e.shape[-1]} != table dim {t.shape[-1]}")
    scores = t @ e
    order = rank_scores(scores)
    return RankedRecommendation(order, scores[order])
