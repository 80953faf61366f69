"""Linear SVM training with an explicit budget on margin-violating samples."""

__version__ = "0.1.0"
