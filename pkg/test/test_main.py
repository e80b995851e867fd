import argparse
import json
import os
import tempfile
import unittest
from unittest import mock

from commwatch import cw_io, main, settings
from commwatch.exceptions import InvalidConfigException


def arguments(command, **kwargs):
    values = dict(command=command, verbose=False, numpy_exception=False, seed=None, out=None,
                  no_banner=True, processes=1, trials=None, nodes=None)
    values.update(kwargs)
    return argparse.Namespace(**values)


class MainTestCase(unittest.TestCase):

    def setUp(self):
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.dir = directory.name

        environment = mock.patch.dict(os.environ)
        environment.start()
        self.addCleanup(environment.stop)
        os.environ.pop(settings.SEED_ENV, None)

    def path(self, name):
        return os.path.join(self.dir, name)

    def write_json(self, name, data):
        path = self.path(name)
        with open(path, 'w') as f:
            json.dump(data, f)
        return path

    def scenario(self, **kwargs):
        data = {'n_nodes': 5, 'p0': 0.3, 'p1': 0.9, 'changepoint': 20, 'community': [0, 1, 2], 'seed': 11}
        data.update(kwargs)
        return self.write_json('scenario.json', data)

    def detector(self, name='detector.json', **kwargs):
        data = {'method': 'Mixture', 'p0': 0.3, 'p1': 0.8, 'threshold': 6.0}
        data.update(kwargs)
        return self.write_json(name, data)


class TestSimulateAndDetect(MainTestCase):

    def test_stream_file_matches_simulation(self):
        stream_path = self.path('stream.jsonl')
        code = main.main(arguments('simulate', scenario=self.scenario(), steps=60, out=stream_path))
        self.assertEqual(code, main.EXIT_OK)
        with open(stream_path) as f:
            self.assertEqual(len(f.read().splitlines()), 60)

        from_file, from_scenario = self.path('file.csv'), self.path('scenario.csv')
        first = main.main(arguments('detect', detector=self.detector(n_nodes=5), stream=stream_path,
                                    scenario=None, max_t=60, out=from_file))
        second = main.main(arguments('detect', detector=self.detector(n_nodes=5), stream=None,
                                     scenario=self.scenario(), max_t=60, out=from_scenario))
        self.assertEqual(first, second)
        self.assertIn(first, (main.EXIT_OK, main.EXIT_NO_ALARM))
        self.assertEqual(cw_io.read_csv(from_file), cw_io.read_csv(from_scenario))

    def test_zero_threshold_alarms_at_once(self):
        out = self.path('detect.csv')
        code = main.main(arguments('detect', detector=self.detector(threshold=0.0), stream=None,
                                   scenario=self.scenario(), max_t=50, out=out))
        self.assertEqual(code, main.EXIT_OK)
        rows = cw_io.read_csv(out)
        self.assertEqual(len(rows), 1)
        self.assertEqual(rows[0]['t'], '1')
        self.assertEqual(rows[0]['alarmed'], '1')
        self.assertEqual(list(rows[0]), list(main.DETECT_FIELDS))

    def test_no_alarm(self):
        out = self.path('detect.csv')
        code = main.main(arguments('detect', detector=self.detector(threshold=1e6), stream=None,
                                   scenario=self.scenario(), max_t=15, out=out))
        self.assertEqual(code, main.EXIT_NO_ALARM)
        self.assertEqual([row['t'] for row in cw_io.read_csv(out)], [str(t) for t in range(1, 16)])

    def test_banner_line(self):
        out = self.path('detect.csv')
        main.main(arguments('detect', detector=self.detector(threshold=0.0), stream=None,
                            scenario=self.scenario(), max_t=5, out=out, no_banner=False))
        with open(out) as f:
            self.assertTrue(f.readline().startswith('# commwatch'))
        self.assertEqual(len(cw_io.read_csv(out)), 1)

    def test_stream_needs_node_count(self):
        stream_path = self.path('stream.jsonl')
        main.main(arguments('simulate', scenario=self.scenario(), steps=10, out=stream_path))
        code = main.main(arguments('detect', detector=self.detector(), stream=stream_path, scenario=None, max_t=10))
        self.assertEqual(code, main.EXIT_CONFIG)

    def test_stream_node_count_from_flag_or_scenario(self):
        stream_path = self.path('stream.jsonl')
        main.main(arguments('simulate', scenario=self.scenario(), steps=40, out=stream_path))
        from_scenario = self.path('scenario.csv')
        expected = main.main(arguments('detect', detector=self.detector(), stream=None, scenario=self.scenario(),
                                       max_t=40, out=from_scenario))

        for name, kwargs in (('nodes.csv', {'nodes': 5, 'scenario': None}),
                             ('both.csv', {'nodes': None, 'scenario': self.scenario()})):
            out = self.path(name)
            code = main.main(arguments('detect', detector=self.detector(), stream=stream_path, max_t=40, out=out,
                                       **kwargs))
            self.assertEqual(code, expected)
            self.assertEqual(cw_io.read_csv(out), cw_io.read_csv(from_scenario))

    def test_conflicting_node_counts(self):
        stream_path = self.path('stream.jsonl')
        main.main(arguments('simulate', scenario=self.scenario(), steps=10, out=stream_path))
        for detector, kwargs in ((self.detector(), {'nodes': 6, 'scenario': self.scenario()}),
                                 (self.detector(n_nodes=6), {'nodes': 5, 'scenario': None})):
            code = main.main(arguments('detect', detector=detector, stream=stream_path, max_t=10, **kwargs))
            self.assertEqual(code, main.EXIT_CONFIG)

    def test_stream_with_more_nodes(self):
        stream_path = self.path('stream.jsonl')
        main.main(arguments('simulate', scenario=self.scenario(), steps=60, out=stream_path))
        code = main.main(arguments('detect', detector=self.detector(n_nodes=4, threshold=1e6), stream=stream_path,
                                   scenario=None, max_t=60, out=self.path('detect.csv')))
        self.assertEqual(code, main.EXIT_CONFIG)

    def test_no_source(self):
        code = main.main(arguments('detect', detector=self.detector(), stream=None, scenario=None, max_t=10))
        self.assertEqual(code, main.EXIT_CONFIG)

    def test_invalid_configs(self):
        for detector in (self.detector('low.json', p1=0.2), self.detector('extra.json', beta=1.0),
                         self.write_json('list.json', [1, 2])):
            code = main.main(arguments('detect', detector=detector, stream=None, scenario=self.scenario(), max_t=10))
            self.assertEqual(code, main.EXIT_CONFIG)

        broken = self.path('broken.json')
        with open(broken, 'w') as f:
            f.write('{"method": ')
        code = main.main(arguments('detect', detector=broken, stream=None, scenario=self.scenario(), max_t=10))
        self.assertEqual(code, main.EXIT_CONFIG)

    def test_missing_file(self):
        code = main.main(arguments('detect', detector=self.path('missing.json'), stream=None,
                                   scenario=self.scenario(), max_t=10))
        self.assertEqual(code, main.EXIT_IO)

    def test_simulate_needs_steps(self):
        code = main.main(arguments('simulate', scenario=self.scenario(), steps=0, out=self.path('s.jsonl')))
        self.assertEqual(code, main.EXIT_CONFIG)


class TestSeeds(MainTestCase):

    def test_precedence(self):
        self.assertEqual(main.resolve_seed(arguments('simulate'), 7), 7)
        self.assertEqual(main.resolve_seed(arguments('simulate')), settings.BASE_SEED)
        os.environ[settings.SEED_ENV] = '99'
        self.assertEqual(main.resolve_seed(arguments('simulate'), 7), 99)
        self.assertEqual(main.resolve_seed(arguments('simulate', seed=3), 7), 3)

    def test_invalid_environment_seed(self):
        os.environ[settings.SEED_ENV] = 'abc'
        with self.assertRaises(InvalidConfigException):
            main.resolve_seed(arguments('simulate'))

    def test_seed_changes_stream(self):
        a, b = self.path('a.jsonl'), self.path('b.jsonl')
        main.main(arguments('simulate', scenario=self.scenario(), steps=30, out=a))
        main.main(arguments('simulate', scenario=self.scenario(), steps=30, out=b, seed=12))
        with open(a) as f, open(b) as g:
            self.assertNotEqual(f.read(), g.read())


class TestExperiments(MainTestCase):

    def test_calibrate(self):
        out = self.path('calibrate.csv')
        code = main.main(arguments('calibrate-mc', detector=self.detector(threshold=1.0), target_arl=20.0,
                                   nodes=4, tol=None, trials=100, out=out))
        self.assertEqual(code, main.EXIT_OK)
        row, = cw_io.read_csv(out)
        self.assertEqual(row['method'], 'Mixture')
        self.assertGreater(float(row['threshold']), 0)

    def test_calibrate_needs_nodes(self):
        code = main.main(arguments('calibrate-mc', detector=self.detector(), target_arl=20.0,
                                   nodes=None, tol=None, trials=10))
        self.assertEqual(code, main.EXIT_CONFIG)

    def test_delay(self):
        out = self.path('delay.csv')
        scenario = self.scenario(n_nodes=4, p1=1.0, changepoint=0, community=[0, 1, 2, 3])
        detector = self.detector(method='ES', p1=0.9, s=4, threshold=0.5)
        code = main.main(arguments('delay', scenario=scenario, detector=detector, max_t=10, trials=5, out=out))
        self.assertEqual(code, main.EXIT_OK)
        row, = cw_io.read_csv(out)
        self.assertEqual(float(row['estimate']), 1.0)
        self.assertEqual(float(row['localization_rate']), 1.0)


class TestTheory(MainTestCase):

    def theory(self, **kwargs):
        data = {'p0': 0.3, 'p1': 0.8, 'n_nodes': 6, 'b': 7.0, 'alpha': 0.2, 'n_effective': 6, 'm1': 5}
        data.update(kwargs)
        return self.write_json('theory.json', data)

    def test_bounds(self):
        out = self.path('theory.csv')
        code = main.main(arguments('theory', theory=self.theory(), target_arl=None, which='LB',
                                   dump_profiles=None, out=out))
        self.assertEqual(code, main.EXIT_OK)
        row, = cw_io.read_csv(out)
        self.assertEqual(float(row['b']), 7.0)
        self.assertEqual(float(row['n_effective']), 6.0)
        self.assertGreater(float(row['arl_lb']), 0)
        self.assertGreater(float(row['arl_ub']), 0)

    def test_dump_profiles(self):
        prefix = self.path('profiles')
        code = main.main(arguments('theory', theory=self.theory(), target_arl=None, which='LB',
                                   dump_profiles=prefix, out=self.path('theory.csv')))
        self.assertEqual(code, main.EXIT_OK)
        terms = cw_io.read_csv(prefix + '-lb.csv')
        self.assertEqual([row['tau'] for row in terms], ['1', '2', '3', '4', '5'])
        samples = cw_io.read_csv(prefix + '-ub.csv')
        self.assertEqual(len(samples), 200)
        self.assertEqual(set(samples[0]), {'y', 'tau', 'integrand', 'log_integrand'})

    def test_no_root(self):
        with mock.patch.object(settings, 'THETA_MAX', 1e-5):
            code = main.main(arguments('theory', theory=self.theory(), target_arl=None, which='LB',
                                       dump_profiles=None))
        self.assertEqual(code, main.EXIT_NO_ROOT)

    def test_needs_threshold_or_target(self):
        path = self.write_json('theory.json', {'p0': 0.3, 'p1': 0.8, 'n_nodes': 6})
        code = main.main(arguments('theory', theory=path, target_arl=None, which='LB', dump_profiles=None))
        self.assertEqual(code, main.EXIT_CONFIG)
