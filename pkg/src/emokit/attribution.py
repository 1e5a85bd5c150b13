"""Emotion attribution and key-frame summarization.

Attribution scores each frame (or clip) by the cosine between its score
vector h and the whole-video encoding s. Summarization greedily picks
key frames maximizing

    max_{j in VK} cos(s, h_j) + lambda * sum_{j in VK} r_j

where r_j is frame j's mean cosine to all frames of the video. The mean
(rather than the bare sum) keeps lambda meaningful across video lengths;
pass unnormalized=True for the bare-sum variant.
"""

from dataclasses import dataclass

import numpy as np

from .dictionary import EmotionDictionary
from .encoding import clip_scores, encode_video, frame_scores
from .errors import ValidationError
from .linalg import as_matrix, cosine, cosine_matrix


@dataclass(frozen=True)
class AttributionResult:
    frame_scores: tuple
    best_frame: int
    clip_ranges: tuple = ()
    clip_scores: tuple = ()
    best_clip: int = -1

    def to_dict(self) -> dict:
        out = {
            "frame_scores": [[int(j), float(v)] for j, v in self.frame_scores],
            "best_frame": int(self.best_frame),
        }
        if self.clip_ranges:
            out["clip_ranges"] = [[int(a), int(b)] for a, b in self.clip_ranges]
            out["clip_scores"] = [[int(p), float(v)] for p, v in self.clip_scores]
            out["best_clip"] = int(self.best_clip)
        return out


@dataclass(frozen=True)
class SummarySelection:
    selected: tuple
    trade_off: float
    objective: float
    budget: int
    gains: tuple = ()

    def to_dict(self) -> dict:
        return {
            "selected": [int(j) for j in self.selected],
            "lambda": float(self.trade_off),
            "objective": float(self.objective),
            "budget": int(self.budget),
        }


def _attribution_scores(features, dictionary: EmotionDictionary, K: int):
    x = as_matrix(features)
    s = encode_video(x, dictionary, K).s
    per_frame = frame_scores(x, dictionary, K)
    scores = np.array([cosine(s, f.h) for f in per_frame])
    return x, s, scores


def attribute_frames(features, dictionary: EmotionDictionary, K: int) -> AttributionResult:
    """Score every frame against the video encoding; ties go to the
    earliest frame."""
    _, _, scores = _attribution_scores(features, dictionary, K)
    return AttributionResult(
        frame_scores=tuple((j, float(v)) for j, v in enumerate(scores)),
        best_frame=int(np.argmax(scores)),
    )


def attribute_clips(features, dictionary: EmotionDictionary, K: int, clips) -> AttributionResult:
    """Frame attribution plus clip-level scores (clip h = sum of frame h)."""
    x = as_matrix(features)
    base = attribute_frames(x, dictionary, K)
    ranges = tuple((int(a), int(b)) for a, b in clips)
    if not ranges:
        raise ValidationError("need at least one clip range")
    s = encode_video(x, dictionary, K).s
    per_clip = clip_scores(x, dictionary, K, ranges)
    values = np.array([cosine(s, h) for h in per_clip])
    return AttributionResult(
        frame_scores=base.frame_scores,
        best_frame=base.best_frame,
        clip_ranges=ranges,
        clip_scores=tuple((p, float(v)) for p, v in enumerate(values)),
        best_clip=int(np.argmax(values)),
    )


def representativeness(features, unnormalized: bool = False) -> np.ndarray:
    """r_j = mean (or sum) cosine between frame j and every frame."""
    x = as_matrix(features)
    sims = cosine_matrix(x, x)
    return sims.sum(axis=1) if unnormalized else sims.mean(axis=1)


def summary_objective(selected, attribution: np.ndarray, rep: np.ndarray, trade_off: float) -> float:
    idx = list(selected)
    if not idx:
        raise ValidationError("cannot evaluate the objective of an empty selection")
    return float(np.max(attribution[idx]) + trade_off * np.sum(rep[idx]))


def summarize(
    features,
    dictionary: EmotionDictionary,
    K: int,
    trade_off: float = 0.5,
    budget: int = 1,
    unnormalized: bool = False,
) -> SummarySelection:
    """Greedy key-frame selection under the attribution + coverage objective.

    Each step adds the frame with the largest total-objective gain (ties
    to the lowest frame index), so the budget-b selection is always a
    prefix of the budget-(b+1) selection.
    """
    x = as_matrix(features)
    n = x.shape[0]
    if not 1 <= budget <= n:
        raise ValidationError(f"budget must be in [1, {n}], got {budget}")
    if trade_off < 0:
        raise ValidationError("lambda must be nonnegative")
    _, _, att = _attribution_scores(x, dictionary, K)
    rep = representativeness(x, unnormalized=unnormalized)

    chosen = []
    gains = []
    best_att = -np.inf
    rep_total = 0.0
    remaining = np.ones(n, dtype=bool)
    prev_value = 0.0
    for step in range(budget):
        cand_att = np.maximum(best_att, att)
        values = np.where(remaining, cand_att + trade_off * (rep_total + rep), -np.inf)
        j = int(np.argmax(values))
        gains.append(float(values[j] - prev_value) if step else float(values[j]))
        prev_value = float(values[j])
        chosen.append(j)
        remaining[j] = False
        best_att = max(best_att, float(att[j]))
        rep_total += float(rep[j])

    # keep pick order: the budget-b selection is a prefix of budget-(b+1)
    selected = tuple(chosen)
    return SummarySelection(
        selected=selected,
        trade_off=float(trade_off),
        objective=summary_objective(selected, att, rep, trade_off),
        budget=int(budget),
        gains=tuple(gains),
    )


def summary_budget_seconds(duration_seconds: float) -> float:
    """Six seconds for videos over a minute, else 10% of the duration."""
    if duration_seconds <= 0:
        raise ValidationError("video duration must be positive")
    return 6.0 if duration_seconds > 60.0 else 0.10 * duration_seconds


def select_summary_clips(selection, clip_seconds: float, fps: float, duration_seconds: float):
    """Expand key frames into centered clips, merge overlaps, and trim
    chronologically to the summary budget."""
    if fps <= 0 or clip_seconds <= 0:
        raise ValidationError("fps and clip_seconds must be positive")
    frames = selection.selected if isinstance(selection, SummarySelection) else tuple(selection)
    if not frames:
        raise ValidationError("no key frames to expand")
    half = 0.5 * clip_seconds
    ranges = []
    for j in sorted(frames):
        center = j / fps
        lo = max(0.0, center - half)
        hi = min(duration_seconds, center + half)
        if hi <= lo:
            continue
        if ranges and lo <= ranges[-1][1]:
            ranges[-1] = (ranges[-1][0], max(ranges[-1][1], hi))
        else:
            ranges.append((lo, hi))
    budget = summary_budget_seconds(duration_seconds)
    trimmed = []
    used = 0.0
    for lo, hi in ranges:
        room = budget - used
        if room <= 0:
            break
        hi = min(hi, lo + room)
        trimmed.append((lo, hi))
        used += hi - lo
    return trimmed
