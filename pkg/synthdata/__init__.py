"""Synthetic multimodal data and augmentation."""
from synthdata.augment import augment
from synthdata.generator import class_split_mask, dataset_summary, generate

__all__ = ["augment", "class_split_mask", "dataset_summary", "generate"]
