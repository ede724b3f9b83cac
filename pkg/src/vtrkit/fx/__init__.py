"""Transition taxonomy, per-frame effect kernels and edited-video composition."""
from .blend import blend_frame
from .io import load_edited_video, save_edited_video
from .taxonomy import (DESK_CATEGORIES, DIRECT_CUT, DIRECTIONAL_WIPES, FAMILIES, MAX_CATEGORIES,
                       TransitionCategory, category_by_name, list_categories)
from .video import (CUT_WINDOW, DEFAULT_TRANSITION_S, Annotation, EditedVideo, Shot, ShotSegment,
                    TransitionClip, compose_edited_video, extract_uncontaminated_segments,
                    render_transition)

__all__ = [
    "Annotation", "CUT_WINDOW", "DEFAULT_TRANSITION_S", "DESK_CATEGORIES", "DIRECT_CUT",
    "DIRECTIONAL_WIPES", "EditedVideo", "FAMILIES", "MAX_CATEGORIES", "Shot", "ShotSegment",
    "TransitionCategory", "TransitionClip", "blend_frame", "category_by_name",
    "compose_edited_video", "extract_uncontaminated_segments", "list_categories",
    "load_edited_video", "render_transition", "save_edited_video",
]
