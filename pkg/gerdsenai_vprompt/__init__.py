"""
GerdsenAI VPrompt - visual prompting corpus toolkit for remote sensing imagery

Converts detection and segmentation annotations into image / visual-prompt /
text triples, synthesizes box, point and free-form prompts, renders
Set-of-Marks overlays, scores predictions with semantic and captioning
metrics, and carries a small numeric reference of the prompt-fusion block.
"""

__version__ = "0.3.0"
__author__ = "GerdsenAI"
