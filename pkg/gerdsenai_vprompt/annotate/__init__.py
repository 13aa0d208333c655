"""
Annotation requests for marked images.

Templates turn a triple's marks into a role/format prompt, the renderer
supplies the overlay, and a provider (offline mock or HTTP) returns text.
Results are written separately from the triple store, keyed by triple id.
"""

from gerdsenai_vprompt.annotate.client import (
    AnnotationProvider,
    HttpProvider,
    MockProvider,
    make_provider,
)
from gerdsenai_vprompt.annotate.dispatch import annotate, dispatch, run_dispatch, write_results
from gerdsenai_vprompt.annotate.requests import (
    AnnotationRequest,
    AnnotationResult,
    answer_categories,
    build_request,
    mark_categories,
)
from gerdsenai_vprompt.annotate.templates import (
    COMPATIBLE_TASKS,
    DEFAULT_TEMPLATES,
    TEMPLATE_ALIASES,
    AnnotationTask,
    AnnotationTemplate,
    get_template,
    template_from_dict,
)

__all__ = [
    "AnnotationProvider",
    "AnnotationRequest",
    "AnnotationResult",
    "AnnotationTask",
    "AnnotationTemplate",
    "COMPATIBLE_TASKS",
    "DEFAULT_TEMPLATES",
    "HttpProvider",
    "MockProvider",
    "TEMPLATE_ALIASES",
    "annotate",
    "answer_categories",
    "build_request",
    "dispatch",
    "get_template",
    "make_provider",
    "mark_categories",
    "run_dispatch",
    "template_from_dict",
    "write_results",
]
