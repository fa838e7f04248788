"""
Output files of a run and their checksums.

Tables go out as CSV (stable headers) or JSON; plots as self-contained
800×600 SVG. Every file is hashed with sha256 into the run manifest, and
nothing time-dependent is written, so reruns give identical hashes.
"""
import csv
import hashlib
import io
import logging
from pathlib import Path

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
from rest_framework.renderers import JSONRenderer  # noqa: E402

from uqsim_backend.errors import UsageError  # noqa: E402

logger = logging.getLogger(__name__)

# svg output is measured in points (72 per inch)
FIGSIZE = (800 / 72, 600 / 72)
DPI = 72
SVG_SALT = 'uqs'

TRAJECTORY_COLUMNS = ['step', 'k', 'fidelity', 'energy']
HISTOGRAM_COLUMNS = ['group', 'energy', 'weight']
SWEEP_COLUMNS = ['eta', 'steps', 'mean_fidelity', 'std', 'sem', 'repetitions']
OBSERVABLE_COLUMNS = ['observable', 'value']
COST_COLUMNS = ['quantity', 'value']
FAMILY_COLUMNS = ['gate_id', 'pair', 'time_cost', 'optimal_time_cost', 'steps']
CROSSTALK_COLUMNS = ['group_a', 'group_b', 'ratio']


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def render_json(data):
    return JSONRenderer().render(data, renderer_context={'indent': 2}) + b'\n'


class ArtifactWriter:
    def __init__(self, out_dir, fmt='csv'):
        if fmt not in ('csv', 'json'):
            raise UsageError(f'Unknown output format {fmt!r}; expected csv or json')
        self.out_dir = Path(out_dir)
        self.fmt = fmt
        self.checksums = {}
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise UsageError(f'Cannot create output directory {self.out_dir}: {exc.strerror}') from None

    def _write(self, name, data):
        path = self.out_dir / name
        path.write_bytes(data)
        self.checksums[name] = hashlib.sha256(data).hexdigest()
        logger.debug('Wrote %s (%d bytes)', path, len(data))
        return path

    def text(self, name, text):
        return self._write(name, text.encode())

    def json(self, name, data):
        return self._write(name, render_json(data))

    def table(self, stem, columns, rows):
        """``rows`` as ``stem``.csv or ``stem``.json, depending on the output format."""
        rows = [dict(zip(columns, row)) if not isinstance(row, dict) else row for row in rows]
        if self.fmt == 'json':
            return self.json(f'{stem}.json', {'columns': columns, 'rows': rows})
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=columns, extrasaction='ignore', lineterminator='\n')
        writer.writeheader()
        writer.writerows(rows)
        return self._write(f'{stem}.csv', buffer.getvalue().encode())

    def figure(self, name, fig):
        buffer = io.BytesIO()
        with matplotlib.rc_context({'svg.hashsalt': SVG_SALT, 'svg.fonttype': 'path'}):
            fig.savefig(buffer, format='svg', metadata={'Date': None})
        plt.close(fig)
        return self._write(name, buffer.getvalue())


def _figure():
    return plt.subplots(figsize=FIGSIZE, dpi=DPI)


def trajectory_plot(trajectory, title='Ground-space weight along the ramp'):
    fig, ax = _figure()
    ax.plot([p.step for p in trajectory], [p.fidelity for p in trajectory], marker='o', markersize=3)
    ax.set_xlabel('step')
    ax.set_ylabel('fidelity to instantaneous ground space')
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return fig


def histogram_plot(histogram, title='Weight per eigenspace of the target'):
    fig, ax = _figure()
    ax.bar(range(len(histogram)), [w for _, w in histogram])
    ax.set_xlabel('eigenvalue group (lowest first)')
    ax.set_ylabel('weight')
    ax.set_ylim(0.0, 1.0)
    ax.set_title(title)
    return fig


def sweep_plot(rows, title='Final fidelity against timing error'):
    fig, ax = _figure()
    for steps in sorted({row.steps for row in rows}):
        series = sorted((row for row in rows if row.steps == steps), key=lambda row: row.eta)
        ax.errorbar([100 * row.eta for row in series], [row.mean for row in series],
                    yerr=[row.sem for row in series], marker='o', capsize=3, label=f'{steps} steps')
    ax.set_xlabel('error η (%)')
    ax.set_ylabel('mean final fidelity')
    ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    return fig
