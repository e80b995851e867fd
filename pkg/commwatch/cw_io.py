""" Reading and writing of configs, snapshot streams and result tables

Streams are JSON Lines, one {"t": t, "edges": [[i, j], ...]} object per
time step with t counting from 1 and 0-based nodes, i < j. Tables are CSV
with a header row, optionally preceded by one '# commwatch' banner line.
"""

import csv
import contextlib
from datetime import datetime
import json
import logging
import sys

from .exceptions import InvalidConfigException, StreamException
from .models import GraphSnapshot

logger = logging.getLogger(__name__)

VERSION = '0.1.0'


def load_json(path):
    """parses a JSON config file; a parse failure is a config error"""

    with open(path) as f:
        try:
            return json.load(f)
        except ValueError as e:
            raise InvalidConfigException(str(path), 'invalid JSON: {}'.format(e))


@contextlib.contextmanager
def open_output(path):
    """path, or stdout when path is None or '-'"""

    if path is None or path == '-':
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, 'w', newline='') as f:
            yield f


def snapshot_line(t, snapshot):
    return json.dumps({'t': t, 'edges': [list(edge) for edge in snapshot.edges()]})


def write_stream(snapshots, path, start=1):
    """writes snapshots as JSON Lines numbered from start; returns the count written"""

    count = 0
    with open_output(path) as f:
        for t, snapshot in enumerate(snapshots, start):
            f.write(snapshot_line(t, snapshot) + '\n')
            count += 1
    logger.debug('wrote {} snapshots to {}'.format(count, path or 'stdout'))
    return count


def parse_snapshot(line, n_nodes, expected_t, where='stream'):
    try:
        record = json.loads(line)
    except ValueError as e:
        raise StreamException('{}: line {} is not JSON: {}'.format(where, expected_t, e))
    if not isinstance(record, dict) or set(record) != {'t', 'edges'}:
        raise StreamException('{}: line {} needs exactly the keys t and edges'.format(where, expected_t))
    if record['t'] != expected_t:
        raise StreamException('{}: expected t={}, found t={}'.format(where, expected_t, record['t']))

    edges = record['edges']
    if not isinstance(edges, list):
        raise StreamException('{}: t={} edges is not a list'.format(where, expected_t))
    for edge in edges:
        if (not isinstance(edge, list) or len(edge) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in edge)):
            raise StreamException('{}: t={} malformed edge {}'.format(where, expected_t, edge))
        i, j = edge
        if not 0 <= i < j < n_nodes:
            raise StreamException('{}: t={} edge ({}, {}) is not a pair i < j of {} nodes'.format(
                where, expected_t, i, j, n_nodes))
    return GraphSnapshot.from_edges(n_nodes, [tuple(edge) for edge in edges])


class FileStream():
    """ iterator over the snapshots of a JSON Lines stream file of n_nodes graphs """

    def __init__(self, path, n_nodes):
        self.path = path
        self.n_nodes = n_nodes
        self.position = 0

    def __iter__(self):
        with open(self.path) as f:
            for line in f:
                if not line.strip():
                    continue
                snapshot = parse_snapshot(line, self.n_nodes, self.position + 1, self.path)
                self.position += 1
                yield snapshot


def banner(command):
    return '# commwatch {} {} {}'.format(VERSION, command, datetime.now().isoformat(timespec='seconds'))


def format_value(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, (tuple, list)):
        return ' '.join(str(v) for v in value)
    return value


def write_csv(rows, path, fieldnames=None, command=None):
    """ writes dict rows; command not None prefixes the banner line """

    rows = list(rows)
    if fieldnames is None:
        fieldnames = []
        for row in rows:
            fieldnames.extend(k for k in row if k not in fieldnames)

    with open_output(path) as f:
        if command is not None:
            f.write(banner(command) + '\n')
        writer = csv.DictWriter(f, fieldnames=fieldnames, lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({k: format_value(row.get(k)) for k in fieldnames})

    logger.debug('wrote {} rows to {}'.format(len(rows), path or 'stdout'))


def read_csv(path):
    """rows of a CSV written by write_csv, banner skipped, values as strings"""

    with open(path, newline='') as f:
        lines = [line for line in f if not line.startswith('#')]
    return list(csv.DictReader(lines))
