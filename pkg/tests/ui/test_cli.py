"""
Unit tests for the command-line interface.
"""

import json

import pytest

from src.ui.cli import main, parse_args


def run(capsys, argv):
    """Run the CLI and return (exit code, JSON lines printed on stdout)."""
    code = main(argv)
    out = capsys.readouterr().out
    return code, [json.loads(line) for line in out.splitlines() if line.strip()]


TINY = ['--layers', '2', '--hidden', '16', '--heads', '2']


@pytest.mark.unit
class TestParseArgs:
    """Argument parsing."""

    def test_ablate(self):
        args = parse_args(['ablate', '--variant', 'late-fusion', '--data', 'd', '--out', 'o'])
        assert (args.command, args.variant, args.data, args.out) == ('ablate', 'late-fusion', 'd', 'o')
        assert args.seed is None

    def test_train_flags(self):
        args = parse_args(['train', '--data', 'd', '--out', 'o', '--hidden', '32', '--lr', '1e-4',
                           '--eval-batch-size', '16', '--seed', '3'])
        assert (args.hidden, args.lr, args.eval_batch_size, args.seed) == (32, 1e-4, 16, 3)

    def test_eval_batch_size(self):
        args = parse_args(['eval', '--checkpoint', 'c', '--data', 'd', '--batch-size', '8'])
        assert args.eval_batch_size == 8
        assert args.split == 'test'

    def test_grad_check_defaults(self):
        args = parse_args(['grad-check'])
        assert args.tolerance == 1e-5
        assert args.max_entries is None

    @pytest.mark.parametrize('argv', [
        ['bogus'],
        [],
        ['ablate', '--variant', 'half', '--data', 'd', '--out', 'o'],
        ['train', '--data', 'd'],
        ['train', '--data', 'd', '--out', 'o', '--fusion', 'middle'],
    ])
    def test_usage_errors_exit_2(self, argv):
        with pytest.raises(SystemExit) as exc_info:
            parse_args(argv)
        assert exc_info.value.code == 2


@pytest.mark.integration
class TestMain:
    """End-to-end runs on a tiny dataset."""

    def test_pipeline(self, tmp_path, capsys):
        data = tmp_path / 'data'
        code, lines = run(capsys, ['gen-data', '--out', str(data), '--n-scenes', '20', '--seed', '4'])
        assert code == 0
        assert set(lines[0]) == {'out', 'splits', 'counts', 'feature_dim', 'vocab_size'}

        run_dir = tmp_path / 'run'
        code, lines = run(capsys, ['train', '--data', str(data), '--out', str(run_dir), *TINY,
                                   '--steps', '2', '--eval-every', '2', '--batch-size', '4'])
        assert code == 0
        checkpoint = lines[0]['checkpoint']
        assert lines[0]['best_step'] == 2

        code, lines = run(capsys, ['eval', '--checkpoint', checkpoint, '--data', str(data)])
        assert code == 0
        assert set(lines[0]) == {'TP', 'FP', 'FN', 'TN', 'accuracy', 'n'}

        code, lines = run(capsys, ['predict', '--checkpoint', checkpoint, '--data', str(data),
                                   '--split', 'validation'])
        assert code == 0
        assert all(set(line) == {'id', 'p', 'predicted', 'label'} for line in lines)

        out_file = tmp_path / 'predictions.jsonl'
        code, lines = run(capsys, ['predict', '--checkpoint', checkpoint, '--data', str(data),
                                   '--out', str(out_file)])
        assert code == 0
        assert lines[0]['n'] == len(out_file.read_text().splitlines())

    def test_runtime_error_exit_1(self, tmp_path, capsys):
        code = main(['eval', '--checkpoint', str(tmp_path / 'absent.ckpt'), '--data', str(tmp_path)])
        captured = capsys.readouterr()
        assert code == 1
        assert captured.out == ''
        assert 'tdu: Evaluation of' in captured.err
        assert 'Error:' in captured.err

    def test_grad_check(self, capsys):
        code, lines = run(capsys, ['grad-check', '--max-entries', '2'])
        assert code == 0
        assert lines[0]['passed'] is True

    def test_failed_grad_check_exit_1(self, capsys):
        code, lines = run(capsys, ['grad-check', '--max-entries', '1', '--tolerance', '0'])
        assert code == 1
        assert lines[0]['passed'] is False
