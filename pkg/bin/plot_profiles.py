#!/usr/bin/env python

""" dev tool to plot the ARL lower bound terms and upper bound integrand
written by `commwatch theory --dump-profiles PREFIX` """

import sys

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt

from commwatch import cw_io as io

prefix = sys.argv[1] if len(sys.argv) > 1 else 'profiles'

lower = io.read_csv(prefix + '-lb.csv')
upper = io.read_csv(prefix + '-ub.csv')

figure, (left, right) = plt.subplots(1, 2, figsize=(10, 4))

left.semilogy([float(r['y']) for r in upper], [float(r['integrand']) for r in upper])
left.set_xlabel('y')
left.set_title('upper bound integrand')

left_terms = [(int(r['tau']), float(r['term'])) for r in lower if r['term']]
right.semilogy([t for t, _ in left_terms], [v for _, v in left_terms], '.')
right.set_xlabel('tau')
right.set_title('lower bound terms')

figure.tight_layout()
figure.savefig(prefix + '.png')
print('wrote {}.png'.format(prefix))
