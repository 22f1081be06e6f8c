from .base import ClassifierContract, LabelMatrix, LearnerError, classifier_from_dict
from .logreg import LogRegConfig, LogRegModel, bce_loss_and_grad, logreg_fit
from .forest import ForestConfig, ForestModel, forest_fit

__all__ = [
    "ClassifierContract",
    "LabelMatrix",
    "LearnerError",
    "classifier_from_dict",
    "LogRegConfig",
    "LogRegModel",
    "bce_loss_and_grad",
    "logreg_fit",
    "ForestConfig",
    "ForestModel",
    "forest_fit",
]
