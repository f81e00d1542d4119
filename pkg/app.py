#!/usr/bin/env python3
"""
Flask results service for functional change-point runs

Read-only views of stored rejection studies and cached critical values, plus a
stateless detection endpoint running the same library path as `fcpd detect`.
"""

import signal
import sys
import logging

from flask import Flask, jsonify, request
from sqlalchemy import desc

from fcpd.config import get_log_level
from fcpd.covariance import BandwidthRule, KernelSpec
from fcpd.critval import CritvalConfig, critical_value, is_cached
from fcpd.cusum import CusumConfig, decide, run_cusum
from fcpd.database import SimulationRun, get_db_session, list_critval_keys, run_to_dict
from fcpd.errors import FcpdError, SampleSizeError
from fcpd.hilbert import FOURIER_25, BasisDescriptor, FunctionalSample, project_curve

# Configure logging
logger = logging.getLogger(__name__)

app = Flask(__name__)

MIN_DETECT_SIZE = 10

# Monte Carlo budget a request may trigger; larger configs are served only from the cache
HTTP_MAX_D = 5


def _critval_config(params, d: int) -> CritvalConfig:
    defaults = CritvalConfig()
    config = CritvalConfig(
        d=d,
        grid_size=int(params.get('grid_size', defaults.grid_size)),
        replications=int(params.get('replications', defaults.replications)),
        seed=int(params.get('seed', defaults.seed)),
        continuity_correction=str(params.get('continuity_correction', 'true')).lower() in ('true', '1'),
    )
    within_budget = (config.d <= HTTP_MAX_D and config.grid_size <= defaults.grid_size
                     and config.replications <= defaults.replications)
    if not within_budget and not is_cached(config):
        raise ValueError(
            f"Critical value for d={config.d}, grid_size={config.grid_size}, replications={config.replications} "
            f"is not cached; requests may simulate at most d={HTTP_MAX_D}, grid_size={defaults.grid_size}, "
            f"replications={defaults.replications}"
        )
    return config


def _sample_from_payload(data) -> FunctionalSample:
    if 'coefficients' in data:
        coeffs = data['coefficients']
        p = len(coeffs[0]) if coeffs else FOURIER_25.dimension
        return FunctionalSample(coeffs, BasisDescriptor('fourier', p))
    if 'curves' in data:
        basis = BasisDescriptor('fourier', int(data.get('p', FOURIER_25.dimension)))
        curves = data['curves']
        grid = data.get('grid')
        if grid is None:
            width = len(curves[0]) if curves else 0
            grid = [k / (width - 1) for k in range(width)] if width > 1 else []
        return FunctionalSample(project_curve(curves, grid, basis), basis)
    raise FcpdError("Request needs 'coefficients' or 'curves'")


@app.route('/api/runs')
def get_runs():
    """List stored simulation runs, newest first"""
    session = get_db_session()
    try:
        runs = session.query(SimulationRun).order_by(desc(SimulationRun.executed_at)).all()
        return jsonify([run_to_dict(run, include_results=False) for run in runs])
    except Exception as e:
        return jsonify({'error': str(e)}), 500
    finally:
        session.close()


@app.route('/api/run/<int:run_id>')
def get_run(run_id):
    """Manifest and rejection rows of one run"""
    session = get_db_session()
    try:
        run = session.query(SimulationRun).filter_by(id=run_id).first()
        if not run:
            return jsonify({'error': 'Run not found'}), 404
        return jsonify(run_to_dict(run))
    except Exception as e:
        return jsonify({'error': str(e)}), 500
    finally:
        session.close()


@app.route('/api/critval')
def get_critval():
    """Critical value for ?d=&alpha= (optional replications, grid_size, seed)"""
    try:
        d = request.args.get('d', 1, type=int)
        alpha = request.args.get('alpha', 0.10, type=float)
        config = _critval_config(request.args, d)
        value = critical_value(d, alpha, config)
        return jsonify({'d': d, 'alpha': alpha, 'critical_value': value,
                        'grid_size': config.grid_size, 'replications': config.replications, 'seed': config.seed})
    except ValueError as e:
        return jsonify({'error': str(e)}), 400


@app.route('/api/critval/cache')
def get_critval_cache():
    try:
        return jsonify(list_critval_keys())
    except Exception as e:
        return jsonify({'error': str(e)}), 500


@app.route('/api/detect', methods=['POST'])
def detect():
    """
    Run the CUSUM test on a posted sample

    Body: {"coefficients": [[...], ...]} or {"curves": [[...]], "grid": [...]},
    optional d, alpha, aligned, estimator, kernel, bandwidth, bandwidth_exp,
    gamma, trace and a "critval" object (replications, grid_size, seed).
    """
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        return jsonify({'error': 'Expected a JSON object'}), 400
    try:
        sample = _sample_from_payload(data)
        if sample.n < MIN_DETECT_SIZE:
            raise SampleSizeError(f"Need at least {MIN_DETECT_SIZE} observations, got {sample.n}")

        if data.get('bandwidth') is not None:
            bandwidth = BandwidthRule.fixed(int(data['bandwidth']))
        else:
            bandwidth = BandwidthRule('power-law', float(data.get('bandwidth_exp', 0.2)))
        config = CusumConfig(
            d=int(data.get('d', 1)),
            gamma=float(data.get('gamma', 0.4)),
            aligned=bool(data.get('aligned', False)),
            estimator=data.get('estimator', 'cov0'),
            kernel=KernelSpec.from_name(data.get('kernel', 'flattop')),
            bandwidth=bandwidth,
        )
        alpha = float(data.get('alpha', 0.10))
        result = decide(run_cusum(sample, config), alpha, _critval_config(data.get('critval', {}), config.d))
        return jsonify(result.to_report(include_trace=bool(data.get('trace', False))))
    except (ValueError, TypeError, IndexError) as e:
        return jsonify({'error': str(e)}), 400


def signal_handler(sig, frame):
    """Handle shutdown signals gracefully"""
    print('\nShutting down gracefully...')
    sys.exit(0)


if __name__ == '__main__':
    logging.basicConfig(level=get_log_level())
    signal.signal(signal.SIGINT, signal_handler)
    signal.signal(signal.SIGTERM, signal_handler)

    try:
        app.run(debug=False, port=5001, threaded=True)
    except KeyboardInterrupt:
        print('\nShutdown requested by user')
    except Exception as e:
        print(f'Server error: {e}')
    finally:
        print('Server stopped')
