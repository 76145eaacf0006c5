"""
Subcommand handlers.

Each handler takes the parsed arguments and returns either the summary
mapping printed as one key=value line, or a plain string printed verbatim.
"""

import argparse
import logging
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Type, Union

from config.settings import (
    DESCRIPTIONS_PER_CLASS,
    EMBEDDING_DIM,
    NORMALIZE_DESCRIPTIONS,
    TIOU_GRID_ANET,
    TIOU_GRID_DEFAULT,
    TIOU_GRID_THUMOS,
)
from ..core.constants import DATASET_ROLES
from ..core.exceptions import CheckpointMismatchError, DataError, UsageError
from ..datasets import SynthConfig, load_dataset, manifest_vocabulary, synth_generate, write_dataset
from ..evaluation import EvalConfig, average_reports, evaluate, read_report, write_report
from ..experiments import ExperimentConfig, compare_mixer_ablation, compare_pretraining, run_ovtal
from ..inference import InferenceConfig, inference_tables, predict_dataset, read_predictions, write_predictions
from ..model import ModelConfig
from ..textbank import (
    SyntheticEmbeddingProvider,
    build_table,
    load_vocabulary,
    read_description_file,
    read_table,
    render_prompt,
    write_description_file,
    write_description_sidecar,
    write_table,
)
from ..training import (
    TrainConfig,
    finetune_stage2,
    get_preset,
    load_checkpoint,
    train_stage1,
)
from .options import build, resolve

logger = logging.getLogger(__name__)

Summary = Union[Dict[str, object], str]

TIOU_GRIDS = {
    'thumos': TIOU_GRID_THUMOS,
    'anet': TIOU_GRID_ANET,
    'default': TIOU_GRID_DEFAULT,
}


class Command(NamedTuple):
    help: str
    sections: Sequence[Type]
    arguments: Callable[[argparse.ArgumentParser], None]
    handler: Callable[[argparse.Namespace], Summary]


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _preset_values(name: Optional[str], *sections: str) -> dict:
    if not name:
        return {}
    preset = get_preset(name)
    values = {}
    for section in sections:
        values.update(getattr(preset, section))
    return values


def _check_table(vocab, table) -> None:
    if table.num_classes != len(vocab):
        raise DataError(
            f'embedding table has {table.num_classes} classes, vocabulary has {len(vocab)}'
        )


# gen

def _gen_arguments(parser):
    parser.add_argument('--vocab', required=True, metavar='PATH', help='vocabulary TSV')
    parser.add_argument('--table', required=True, metavar='PATH', help='class embedding table')
    parser.add_argument('--name', default='synthetic', help="dataset name (default: 'synthetic')")
    parser.add_argument('--role', default='test', choices=DATASET_ROLES,
                        help="dataset role (default: 'test')")
    parser.add_argument('--classes', default=None, metavar='IDS',
                        help='comma-separated class ids to plant (default: all)')


def cmd_gen(args) -> Summary:
    values = resolve([SynthConfig], args)
    synth = build(SynthConfig, values)
    vocab = load_vocabulary(args.vocab)
    table = read_table(args.table)
    _check_table(vocab, table)
    class_ids = None
    if args.classes:
        class_ids = [int(c) for c in args.classes.split(',') if c.strip()]
    videos = synth_generate(synth, table, class_ids, threads=args.threads)
    manifest = write_dataset(videos, args.vocab, _out_dir(args), args.name, args.role)
    return {'videos': len(videos), 'manifest': manifest}


# embed

def _embed_arguments(parser):
    parser.add_argument('--vocab', required=True, metavar='PATH', help='vocabulary TSV')
    parser.add_argument('--descriptions', metavar='PATH',
                        help='pre-computed description embeddings (OVTB)')
    parser.add_argument('--synthetic', action='store_true',
                        help='synthesize seeded description embeddings')
    parser.add_argument('--dim', type=int, default=EMBEDDING_DIM,
                        help=f'embedding width for --synthetic (default: {EMBEDDING_DIM})')
    parser.add_argument('--per_class', type=int, default=DESCRIPTIONS_PER_CLASS,
                        help=f'descriptions per class (default: {DESCRIPTIONS_PER_CLASS})')
    parser.add_argument('--description_seed', type=int, default=0,
                        help='seed of synthetic description perturbations (default: 0)')
    parser.add_argument('--normalize', action='store_true', default=NORMALIZE_DESCRIPTIONS,
                        help='L2-normalize descriptions before averaging')
    parser.add_argument('--name', default='table.ovzl', help="table file name (default: 'table.ovzl')")


def cmd_embed(args) -> Summary:
    vocab = load_vocabulary(args.vocab)
    out = _out_dir(args)
    if args.synthetic == bool(args.descriptions):
        raise UsageError('give exactly one of --descriptions or --synthetic')
    if args.synthetic:
        provider = SyntheticEmbeddingProvider(prototype_seed=args.seed or 0,
                                              description_seed=args.description_seed)
        sets = provider.describe(vocab, args.per_class, args.dim)
        write_description_file(sets, out / 'descriptions.ovtb')
        write_description_sidecar({s.class_id: s.descriptions for s in sets}, out / 'descriptions.txt')
    else:
        sets = read_description_file(args.descriptions)
    table = build_table(vocab, sets, args.normalize)
    path = write_table(table, out / args.name)
    return {'classes': table.num_classes, 'dim': table.dim, 'table': path}


# prompt

def _prompt_arguments(parser):
    parser.add_argument('--class', dest='classname', metavar='NAME', help='action class name')
    parser.add_argument('--vocab', metavar='PATH', help='render one prompt per vocabulary class')


def cmd_prompt(args) -> Summary:
    if args.classname:
        return render_prompt(args.classname)
    if args.vocab:
        vocab = load_vocabulary(args.vocab)
        return '\n'.join(f'{e.class_id}\t{render_prompt(e.name)}' for e in vocab)
    raise UsageError('give --class or --vocab')


# train / finetune

def _train_arguments(parser):
    parser.add_argument('--data', required=True, metavar='PATH', help='training manifest')
    parser.add_argument('--table', required=True, metavar='PATH', help='class embedding table')
    parser.add_argument('--preset', default=None, help='stage1 | thumos-ft | anet-ft | acceptance')


def _finetune_arguments(parser):
    _train_arguments(parser)
    parser.add_argument('--init', required=True, metavar='PATH', help='stage-one checkpoint')


def _train_summary(stage: str, report) -> Dict[str, object]:
    totals = report.totals
    return {
        'stage': stage,
        'epochs': len(totals),
        'first_loss': totals[0] if totals else None,
        'final_loss': totals[-1] if totals else None,
        'best_epoch': report.best_epoch,
        'checkpoint': report.checkpoint,
    }


def cmd_train(args) -> Summary:
    values = resolve([ModelConfig, TrainConfig], args,
                     _preset_values(args.preset, 'model', 'train'))
    model_cfg = build(ModelConfig, values)
    cfg = build(TrainConfig, values)
    videos = load_dataset(args.data, args.threads)
    _, report = train_stage1(videos, read_table(args.table), model_cfg, cfg, _out_dir(args))
    return _train_summary(cfg.stage, report)


def cmd_finetune(args) -> Summary:
    checkpoint = load_checkpoint(args.init)
    defaults = dict(checkpoint.config.to_dict(), stage='two', active_vocab='base')
    defaults.update(_preset_values(args.preset, 'model', 'train'))
    values = resolve([ModelConfig, TrainConfig], args, defaults)
    model_cfg = build(ModelConfig, values)
    cfg = build(TrainConfig, values)
    videos = load_dataset(args.data, args.threads)
    _, report = finetune_stage2(checkpoint, videos, read_table(args.table), model_cfg, cfg,
                                _out_dir(args))
    return _train_summary(cfg.stage, report)


# predict

def _predict_arguments(parser):
    parser.add_argument('--checkpoint', required=True, metavar='PATH', help='trained checkpoint')
    parser.add_argument('--data', required=True, metavar='PATH', help='test manifest')
    parser.add_argument('--table', required=True, metavar='PATH', help='inference class table')
    parser.add_argument('--vocab', metavar='PATH',
                        help='vocabulary with split tags (default: the manifest vocabulary)')
    parser.add_argument('--preset', default=None, help='stage1 | thumos-ft | anet-ft | acceptance')


def cmd_predict(args) -> Summary:
    checkpoint = load_checkpoint(args.checkpoint)
    defaults = checkpoint.config.to_dict()
    defaults.update(_preset_values(args.preset, 'inference'))
    values = resolve([ModelConfig, InferenceConfig], args, defaults)
    model_cfg = build(ModelConfig, values)
    mismatches = model_cfg.mismatches(checkpoint.config)
    if mismatches:
        raise CheckpointMismatchError(mismatches)
    cfg = build(InferenceConfig, values)
    vocab = load_vocabulary(args.vocab) if args.vocab else manifest_vocabulary(args.data)
    table = read_table(args.table)
    _check_table(vocab, table)
    context, scored = inference_tables(table, vocab, cfg.selection)
    videos = load_dataset(args.data, args.threads)
    predictions = predict_dataset(videos, context, checkpoint.params, model_cfg, cfg,
                                  classify_table=scored, threads=args.threads)
    path = write_predictions(predictions, _out_dir(args) / 'predictions.json')
    return {'videos': len(predictions),
            'detections': sum(len(d) for d in predictions.values()),
            'predictions': path}


# eval / report

def _eval_arguments(parser):
    parser.add_argument('--predictions', required=True, metavar='PATH', help='predictions JSON')
    parser.add_argument('--data', required=True, metavar='PATH', help='annotated manifest')
    parser.add_argument('--vocab', metavar='PATH',
                        help='vocabulary with split tags (default: the manifest vocabulary)')
    parser.add_argument('--grid', choices=sorted(TIOU_GRIDS), default=None,
                        help='named tIoU grid (overrides tiou_grid)')


def cmd_eval(args) -> Summary:
    preset = {'tiou_grid': TIOU_GRIDS[args.grid]} if args.grid else {}
    values = resolve([EvalConfig], args)
    values.update(preset)
    cfg = build(EvalConfig, values)
    vocab = load_vocabulary(args.vocab) if args.vocab else manifest_vocabulary(args.data)
    videos = load_dataset(args.data, args.threads)
    report = evaluate(read_predictions(args.predictions), videos, vocab, cfg, args.threads)
    path = write_report(report, _out_dir(args) / 'eval.json')
    return dict(report.summary(), report=path)


def _report_arguments(parser):
    parser.add_argument('reports', nargs='+', metavar='REPORT', help='EvalReport JSON files')


def cmd_report(args) -> Summary:
    return average_reports([read_report(path) for path in args.reports])


# experiment

def _experiment_arguments(parser):
    parser.add_argument('--which', choices=('ovtal', 'ablation', 'pretraining'),
                        default='ovtal', help="experiment to run (default: 'ovtal')")
    parser.add_argument('--seeds', default='0,1,2',
                        help="comma-separated seeds for comparisons (default: '0,1,2')")
    parser.add_argument('--late_fusion_only', action='store_true',
                        help='ovtal: ablate encoder cross-attention')
    parser.add_argument('--scratch', action='store_true',
                        help='ovtal: finetune from a random init instead of stage one')


def cmd_experiment(args) -> Summary:
    values = resolve([ExperimentConfig], args)
    values['threads'] = args.threads
    cfg = build(ExperimentConfig, values)
    out = _out_dir(args)
    seed = args.seed or 0
    if args.which == 'ovtal':
        report = run_ovtal(out, seed, args.late_fusion_only, not args.scratch, cfg)
        return dict(report.summary(), seed=seed)
    seeds: List[int] = [int(s) for s in args.seeds.split(',') if s.strip()]
    if args.which == 'ablation':
        mixer, late = compare_mixer_ablation(out, seeds, cfg)
        return {'mixer_map_novel': mixer, 'late_fusion_map_novel': late}
    pretrained, scratch = compare_pretraining(out, seeds, cfg)
    return {'pretrained_map_novel': pretrained, 'scratch_map_novel': scratch}


COMMANDS: Dict[str, Command] = {
    'gen': Command('generate a synthetic dataset', [SynthConfig], _gen_arguments, cmd_gen),
    'embed': Command('build a class embedding table', [], _embed_arguments, cmd_embed),
    'prompt': Command('print the description prompt', [], _prompt_arguments, cmd_prompt),
    'train': Command('stage one training', [ModelConfig, TrainConfig],
                     _train_arguments, cmd_train),
    'finetune': Command('stage two finetuning', [ModelConfig, TrainConfig],
                        _finetune_arguments, cmd_finetune),
    'predict': Command('detect actions', [ModelConfig, InferenceConfig],
                       _predict_arguments, cmd_predict),
    'eval': Command('score predictions', [EvalConfig], _eval_arguments, cmd_eval),
    'report': Command('average several evaluation reports', [], _report_arguments, cmd_report),
    'experiment': Command('synthetic open-vocabulary experiments', [ExperimentConfig],
                          _experiment_arguments, cmd_experiment),
}
