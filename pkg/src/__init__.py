"""
OVFormer Desk
=============

Open-vocabulary temporal action localization on a numpy tensor core:
class-description embeddings, a modality-mixer feature pyramid, focal and
DIoU training, temporal NMS and split-wise mAP evaluation.
"""

__version__ = '1.0.0'
