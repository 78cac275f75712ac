"""qaprobe: a workbench for probing the trustworthiness of QA models.

Token saliency maps, saliency-driven adversarial attacks, a miniature
knowledge-graph datastore, an interpretable graph reasoner, and an HTTP
service tying them together.
"""

__version__ = "0.1.0"
