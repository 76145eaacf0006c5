"""
Two-stage training.

Stage one trains from scratch on the large vocabulary; stage two loads those
weights and finetunes on the downstream base classes. Both stages run the
same loop: fixed-length windows, a seeded shuffle per epoch, per-step
warmup+cosine learning rate, best-by-loss checkpointing.
"""

import logging
import math
import time
from pathlib import Path
from typing import List, Optional, Sequence, Set, Union

import numpy as np

from ..core.constants import SPLIT_BASE, SPLIT_SUPER
from ..core.exceptions import (
    CheckpointMismatchError,
    ConfigurationError,
    NumericError,
    UsageError,
)
from ..core.seeding import derive_rng
from ..datasets.types import VideoFeatures
from ..datasets.windowing import pad_or_window
from ..losses import LossBreakdown, assign_targets, joint_loss
from ..model.config import ModelConfig
from ..model.network import forward
from ..model.params import ModelParams, init_params, parameter_shapes
from ..tensor import ComputationTape, ops
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import TrainConfig
from .optimizer import AdamWState, optimizer_step
from .report import EpochLoss, TrainReport, write_train_log, write_train_summary
from .schedule import lr_at

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
InitSource = Union[ModelParams, Checkpoint, str, Path]


def make_windows(videos: Sequence[VideoFeatures], max_len: int) -> List[VideoFeatures]:
    """Pad or window every video to max_len timesteps, in input order."""
    windows = []
    for video in videos:
        windows.extend(pad_or_window(video, max_len))
    return windows


def check_vocabulary(videos: Sequence[VideoFeatures], table) -> None:
    """
    Raises:
        ConfigurationError: If any annotation uses a class missing from the table
    """
    known = set(table.class_ids)
    missing = sorted({a.class_id for v in videos for a in v.annotations} - known)
    if missing:
        raise ConfigurationError(
            f'annotation classes {missing} are not in the active vocabulary '
            f'({table.num_classes} classes)', key='active_vocab'
        )


def frozen_names(params: ModelParams, freeze: str) -> Set[str]:
    if freeze == 'enc':
        return set(params.encoder_names())
    if freeze == 'dec':
        return set(params.decoder_names())
    return set()


def window_loss(window: VideoFeatures, table, params: ModelParams,
                model_cfg: ModelConfig, cfg: TrainConfig) -> LossBreakdown:
    """Joint loss of one window (recorded on the active tape)."""
    out = forward(window, table, params, model_cfg)
    assignment = assign_targets(
        window.annotations,
        [logits.shape[0] for logits in out.logits],
        table.column_of(),
        center_ratio=cfg.center_ratio,
        masks=out.masks,
    )
    return joint_loss(out.logits, out.offsets, assignment, cfg.loss_weight,
                      cfg.focal_alpha, cfg.focal_gamma)


class Trainer:
    """
    Single-writer training loop over pre-windowed data.

    Args:
        params: Parameters to train (modified in place)
        model_cfg: Model configuration
        cfg: Training configuration
        out_dir: Where checkpoints and reports go (None: keep in memory)
    """

    def __init__(self, params: ModelParams, model_cfg: ModelConfig, cfg: TrainConfig,
                 out_dir: Optional[PathLike] = None):
        self.params = params
        self.model_cfg = model_cfg
        self.cfg = cfg
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.state = AdamWState(weight_decay=cfg.weight_decay)
        self.frozen = frozen_names(params, cfg.freeze)

    def _batches(self, n: int, epoch: int) -> List[np.ndarray]:
        order = derive_rng(self.cfg.seed, 'shuffle', epoch).permutation(n)
        size = self.cfg.batch_size
        return [order[i:i + size] for i in range(0, n, size)]

    def _checkpoint_path(self, tag: str) -> Optional[Path]:
        if self.out_dir is None:
            return None
        return self.out_dir / f'stage{self.cfg.stage}_{tag}.ovck'

    def step(self, batch: Sequence[VideoFeatures], table, lr: float) -> EpochLoss:
        """One optimizer step on the mean loss of a batch."""
        self.params.zero_grad()
        cls_sum = reg_sum = total_sum = 0.0
        for window in batch:
            with ComputationTape() as tape:
                loss = window_loss(window, table, self.params, self.model_cfg, self.cfg)
                cls, reg, total = loss.values()
                if not math.isfinite(total):
                    raise NumericError(f'loss of {window.video_id}@{window.offset}')
                tape.backward(ops.mul(loss.total, 1.0 / len(batch)))
            cls_sum += cls
            reg_sum += reg
            total_sum += total
        optimizer_step(self.params, self.state, lr, self.cfg.grad_clip, self.frozen)
        n = len(batch)
        return EpochLoss(cls_sum / n, reg_sum / n, total_sum / n)

    def fit(self, windows: Sequence[VideoFeatures], table) -> TrainReport:
        """
        Train for cfg.epochs and keep the parameters of the lowest-loss epoch.

        Returns:
            TrainReport; self.params holds the best parameters afterwards
        """
        cfg = self.cfg
        report = TrainReport(cfg.stage, cfg.seed, config={
            'train': cfg.to_dict(), 'model': self.model_cfg.to_dict()
        })
        started = time.perf_counter()
        best = self.params.clone()
        best_total = math.inf
        if not windows and cfg.epochs > 0:
            raise UsageError('no training windows')
        steps_per_epoch = -(-len(windows) // cfg.batch_size) if windows else 0
        total_steps = cfg.epochs * steps_per_epoch
        warmup_steps = cfg.warmup_epochs * steps_per_epoch
        step = 0
        for epoch in range(1, cfg.epochs + 1):
            sums = np.zeros(3)
            batches = self._batches(len(windows), epoch)
            for index in batches:
                lr = lr_at(step, total_steps, warmup_steps, cfg.lr, cfg.min_lr_ratio)
                loss = self.step([windows[i] for i in index], table, lr)
                sums += (loss.cls, loss.reg, loss.total)
                step += 1
            mean = sums / len(batches)
            epoch_loss = EpochLoss(float(mean[0]), float(mean[1]), float(mean[2]))
            report.losses.append(epoch_loss)
            logger.info('stage %s epoch %d/%d: cls=%.4f reg=%.4f total=%.4f',
                        cfg.stage, epoch, cfg.epochs, *mean)
            last = self._checkpoint_path('last')
            if last is not None:
                save_checkpoint(self.params, self.model_cfg, last, cfg.seed, cfg.stage)
            if epoch_loss.total < best_total:
                best_total = epoch_loss.total
                best = self.params.clone()
                report.best_epoch = epoch
                path = self._checkpoint_path('best')
                if path is not None:
                    save_checkpoint(self.params, self.model_cfg, path, cfg.seed, cfg.stage)

        # epochs=0 keeps the initial parameters
        if cfg.epochs == 0:
            path = self._checkpoint_path('best')
            if path is not None:
                save_checkpoint(self.params, self.model_cfg, path, cfg.seed, cfg.stage)
        for name, tensor in best.items():
            self.params[name].data = tensor.data
        report.wall_time = time.perf_counter() - started
        best_path = self._checkpoint_path('best')
        if best_path is not None:
            report.checkpoint = str(best_path)
            write_train_log(report, self.out_dir / f'stage{cfg.stage}_loss.tsv')
            write_train_summary(report, self.out_dir / f'stage{cfg.stage}_report.json')
        logger.info('stage %s finished in %.1fs (best epoch %d)',
                    cfg.stage, report.wall_time, report.best_epoch)
        return report


def _resolve_init(init: InitSource, model_cfg: ModelConfig) -> ModelParams:
    if isinstance(init, ModelParams):
        init.check_shapes(parameter_shapes(model_cfg))
        return init.clone()
    if isinstance(init, Checkpoint):
        mismatches = model_cfg.mismatches(init.config)
        if mismatches:
            raise CheckpointMismatchError(mismatches)
        return init.params.clone()
    return load_checkpoint(init, model_cfg).params


def train_stage1(data_super: Sequence[VideoFeatures], table_super,
                 model_cfg: ModelConfig, cfg: TrainConfig,
                 out_dir: Optional[PathLike] = None):
    """
    Train from a seeded random init on the large vocabulary.

    Args:
        data_super: Training videos annotated with V_super ids
        table_super: Class embeddings of V_super
        model_cfg: Model configuration (max_seq_len sets the window length)
        cfg: Training configuration with stage "one"
        out_dir: Optional checkpoint/report directory

    Returns:
        (best ModelParams, TrainReport)

    Raises:
        ConfigurationError: On a wrong stage, vocabulary or dataset/vocab mismatch
    """
    if cfg.stage != 'one' or cfg.active_vocab != SPLIT_SUPER:
        raise ConfigurationError('stage one trains on the super vocabulary',
                                 key='active_vocab')
    check_vocabulary(data_super, table_super)
    params = init_params(model_cfg, cfg.seed)
    trainer = Trainer(params, model_cfg, cfg, out_dir)
    report = trainer.fit(make_windows(data_super, model_cfg.max_seq_len), table_super)
    return trainer.params, report


def finetune_stage2(init: InitSource, data_base: Sequence[VideoFeatures], table_base,
                    model_cfg: ModelConfig, cfg: TrainConfig,
                    out_dir: Optional[PathLike] = None):
    """
    Finetune stage-one weights on the base vocabulary.

    The classification head scores against text embeddings, so the
    vocabulary size may differ from stage one. Optimizer state starts fresh.

    Args:
        init: Stage-one parameters, a Checkpoint or a checkpoint path
        data_base: Training videos annotated with V_base ids
        table_base: Class embeddings of V_base
        model_cfg: Model configuration
        cfg: Training configuration with stage "two"
        out_dir: Optional checkpoint/report directory

    Returns:
        (best ModelParams, TrainReport)

    Raises:
        CheckpointMismatchError: If the initial weights do not fit model_cfg
        ConfigurationError: On a wrong stage or a dataset/vocab mismatch
    """
    if cfg.stage != 'two' or cfg.active_vocab != SPLIT_BASE:
        raise ConfigurationError('stage two finetunes on the base vocabulary',
                                 key='active_vocab')
    params = _resolve_init(init, model_cfg)
    check_vocabulary(data_base, table_base)
    trainer = Trainer(params, model_cfg, cfg, out_dir)
    report = trainer.fit(make_windows(data_base, model_cfg.max_seq_len), table_base)
    return trainer.params, report
