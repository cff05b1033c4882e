"""physiobench: ECG/EDA feature extraction and a cross-dataset
anxiety-detection generalizability benchmark."""

__version__ = "0.1.0"
