"""
Tests for the ``flask sim`` commands.
"""
import json
import os

import pandas as pd
import pytest


def _write_ri(path, level, failures, trials=1000):
    frame = pd.DataFrame([(level, i, trials, f) for i, f in enumerate(failures, start=1)],
                         columns=['level', 'i', 'trials', 'failures'])
    frame.to_csv(path, mode='a', header=not os.path.exists(path), index=False)


@pytest.fixture
def ri_csv(tmp_path):
    path = str(tmp_path / 'ri.csv')
    _write_ri(path, 1, [0, 12, 60, 150, 260, 380])
    _write_ri(path, 2, [0, 0, 0, 20, 60, 120, 200, 280, 360, 430])
    return path


class TestBuild:
    """Tests for the build command."""

    def test_exrec_level_one(self, runner, app):
        """Test that the level-1 exRec reports its size and writes a manifest."""
        result = runner.invoke(args=['sim', 'build', '--level', '1'])
        assert result.exit_code == 0, result.output
        assert result.output.startswith('total 224 depth 25 ')
        manifest = os.path.join(app.config['QEC_RESULTS_DIR'], 'build.manifest.json')
        with open(manifest) as f:
            data = json.load(f)
        assert data['totals']['locations'] == 224
        assert 'ec' in data['template_hashes']

    def test_ec_with_reference(self, runner, tmp_path):
        """Test the EC summary, its data swaps and the non-local comparison."""
        out = str(tmp_path / 'ec.txt')
        result = runner.invoke(args=['sim', 'build', '--level', '1', '--gadget', 'ec',
                                     '--compare-nonlocal', '--out', out])
        assert result.exit_code == 0, result.output
        lines = result.output.splitlines()
        assert lines[0].startswith('total 38 depth 8 ')
        assert 'data-data swaps 2' in lines
        assert any(line.startswith('nonlocal total 40 depth 8') for line in lines)
        assert os.path.exists(out)
        assert os.path.exists(str(tmp_path / 'ec.nonlocal.txt'))
        assert os.path.exists(str(tmp_path / 'ec.manifest.json'))

    def test_level_zero(self, runner):
        """Test that level 0 is a usage error."""
        result = runner.invoke(args=['sim', 'build', '--level', '0'])
        assert result.exit_code == 2

    def test_level_above_limit(self, runner):
        """Test that a refused build exits with the runtime error code."""
        result = runner.invoke(args=['sim', 'build', '--level', '5'])
        assert result.exit_code == 3


class TestSampling:
    """Tests for rsubset and mc."""

    def test_rsubset_reproducible(self, runner, tmp_path):
        """Test that rsubset is reproducible and appends to its table."""
        out = str(tmp_path / 'ri.csv')
        args = ['sim', 'rsubset', '--level', '1', '--errors', '2', '--trials', '30', '--seed', '5', '--out', out]
        first = runner.invoke(args=args)
        second = runner.invoke(args=args)
        assert first.exit_code == 0, first.output
        assert first.output == second.output
        assert first.output.startswith('1,2,30,')
        frame = pd.read_csv(out)
        assert len(frame) == 2
        assert list(frame.columns) == ['level', 'i', 'trials', 'failures']

    def test_rsubset_too_many_errors(self, runner):
        """Test that more faults than locations is a usage error."""
        result = runner.invoke(args=['sim', 'rsubset', '--level', '1', '--errors', '300', '--trials', '5'])
        assert result.exit_code == 2

    def test_mc_noiseless_and_resume(self, runner, tmp_path):
        """Test a noiseless campaign and that a rerun resumes from the checkpoint."""
        out = str(tmp_path / 'mc.csv')
        args = ['sim', 'mc', '--level', '1', '--p', '0', '--trials', '120', '--seed', '3', '--out', out]
        result = runner.invoke(args=args)
        assert result.exit_code == 0, result.output
        assert '0/120 failures' in result.output
        assert len(pd.read_csv(out)) == 3

        rerun = runner.invoke(args=args)
        assert rerun.exit_code == 0, rerun.output
        assert '0/120 failures' in rerun.output
        assert len(pd.read_csv(out)) == 3

    def test_mc_invalid_p(self, runner):
        """Test that p above 1 is rejected by option parsing."""
        result = runner.invoke(args=['sim', 'mc', '--level', '1', '--p', '1.5', '--trials', '10'])
        assert result.exit_code == 2


class TestCurves:
    """Tests for expand and scan."""

    def test_expand(self, runner, ri_csv, tmp_path):
        """Test that expand writes one curve per level on the requested grid."""
        out_dir = str(tmp_path / 'curves')
        result = runner.invoke(args=['sim', 'expand', '--ri', ri_csv, '--level', '1',
                                     '--points', '5', '--out-dir', out_dir])
        assert result.exit_code == 0, result.output
        curve = pd.read_csv(os.path.join(out_dir, 'curve_level1.csv'))
        assert list(curve.columns) == ['level', 'p', 'pfail', 'plo', 'phi']
        assert len(curve) == 5
        assert (curve['plo'] <= curve['pfail']).all()
        assert 'N=224' in result.output
        assert os.path.exists(os.path.join(out_dir, 'expand.manifest.json'))

    def test_scan_with_resources(self, runner, ri_csv, tmp_path):
        """Test that scan compares consecutive levels and estimates resources."""
        out_dir = str(tmp_path / 'scan')
        result = runner.invoke(args=['sim', 'scan', '--ri', ri_csv, '--locations', '2:2000',
                                     '--out-dir', out_dir, '--target', '1e-9', '--at-p', '1e-6'])
        assert result.exit_code == 0, result.output
        assert 'levels 1/2:' in result.output
        assert 'qubits per block' in result.output or 'no level reaches' in result.output
        assert os.path.exists(os.path.join(out_dir, 'curve_level2.csv'))
        with open(os.path.join(out_dir, 'scan.manifest.json')) as f:
            assert 'resources' in json.load(f)['totals']

    def test_scan_target_needs_p(self, runner, ri_csv, tmp_path):
        """Test that a resource target without a p is a usage error."""
        result = runner.invoke(args=['sim', 'scan', '--ri', ri_csv, '--out-dir', str(tmp_path),
                                     '--locations', '2:2000', '--target', '1e-9'])
        assert result.exit_code == 2

    def test_bad_locations_override(self, runner, ri_csv):
        """Test that a malformed size override is a usage error."""
        result = runner.invoke(args=['sim', 'expand', '--ri', ri_csv, '--locations', 'two'])
        assert result.exit_code == 2

    def test_missing_table(self, runner, tmp_path):
        """Test that a missing r_i file exits with the runtime error code."""
        result = runner.invoke(args=['sim', 'expand', '--ri', str(tmp_path / 'absent.csv')])
        assert result.exit_code == 3
