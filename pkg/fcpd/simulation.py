"""
Rejection-rate study over scenarios, sample sizes and statistic variants

Each replication r draws its sample with seed ``seed + r`` and evaluates the
four variants v1 (standard PCs), v1_aligned, v1B (long-run PCs) and
v1B_aligned on it. Replications run in a thread pool; results are collected
in replication order so the table does not depend on the worker count.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import pandas as pd

from fcpd import database
from fcpd.config import get_threads
from fcpd.covariance import BandwidthRule, KernelSpec
from fcpd.critval import CritvalConfig, critical_value
from fcpd.cusum import DEFAULT_GAMMA, CusumConfig, run_cusum
from fcpd.datagen import SCENARIOS, scenario
from fcpd.manifest import RunManifest

logger = logging.getLogger(__name__)

VARIANTS = ('v1', 'v1_aligned', 'v1B', 'v1B_aligned')
DEFAULT_SAMPLE_SIZES = (100, 200, 300, 400, 500)


@dataclass(frozen=True)
class StudyConfig:
    scenarios: Tuple[str, ...] = SCENARIOS
    sample_sizes: Tuple[int, ...] = DEFAULT_SAMPLE_SIZES
    replications: int = 1000
    seed: int = 1
    alpha: float = 0.10
    d: int = 1
    gamma: float = DEFAULT_GAMMA
    kernel: KernelSpec = field(default_factory=KernelSpec)
    bandwidth: BandwidthRule = field(default_factory=BandwidthRule)
    psi_norm: Optional[float] = None
    critval: CritvalConfig = field(default_factory=CritvalConfig)

    def __post_init__(self):
        object.__setattr__(self, 'scenarios', tuple(s.upper() for s in self.scenarios))
        object.__setattr__(self, 'sample_sizes', tuple(int(n) for n in self.sample_sizes))
        unknown = [s for s in self.scenarios if s not in SCENARIOS]
        if unknown:
            raise ValueError(f"Unknown scenarios {unknown}, expected a subset of {SCENARIOS}")
        if not self.scenarios or not self.sample_sizes:
            raise ValueError("Need at least one scenario and one sample size")
        if min(self.sample_sizes) < 10:
            raise ValueError("Sample sizes must be >= 10")
        if self.replications < 100:
            raise ValueError(f"replications must be >= 100, got {self.replications}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    def variant_configs(self) -> Dict[str, CusumConfig]:
        configs = {}
        for estimator in ('cov0', 'bartlett'):
            for aligned in (False, True):
                cfg = CusumConfig(d=self.d, gamma=self.gamma, aligned=aligned, estimator=estimator,
                                  kernel=self.kernel, bandwidth=self.bandwidth)
                configs[cfg.variant] = cfg
        return configs

    def to_params(self) -> Dict:
        params = asdict(self)
        params['scenarios'] = list(self.scenarios)
        params['sample_sizes'] = list(self.sample_sizes)
        return params


class RejectionStudy:
    def __init__(self, config: StudyConfig = None, threads: Optional[int] = None, persist: bool = True):
        """
        Set up a study

        Args:
            config: grid of scenarios and sample sizes, replication count, seed
            threads: worker count, defaults to FCPD_THREADS
            persist: store the run in the results database
        """
        self.config = config or StudyConfig()
        self.threads = threads or get_threads()
        self.persist = persist
        self.run_id = None
        self.critical_value = None
        self.rows: List[Dict] = []
        self._variants = self.config.variant_configs()
        self.manifest = RunManifest(
            command='simulate',
            params=self.config.to_params(),
            seeds=[self.config.seed],
        )

    def _replicate(self, scenario_id: str, n: int, rep: int) -> Dict[str, bool]:
        sample = scenario(scenario_id, n, seed=self.config.seed + rep, psi_norm=self.config.psi_norm)
        decisions = {}
        for name, cfg in self._variants.items():
            result = run_cusum(sample, cfg)
            decisions[name] = bool(result.degenerate or result.statistic > self.critical_value)
        return decisions

    def _resolve_critical_value(self):
        cfg = self.config
        self.critical_value = critical_value(cfg.d, cfg.alpha, cfg.critval)
        logger.info(f"Critical value for d={cfg.d}, alpha={cfg.alpha}: {self.critical_value:.4f}")

    def run_cell(self, scenario_id: str, n: int) -> List[Dict]:
        """Rejection counts of all variants for one (scenario, n) cell"""
        if self.critical_value is None:
            self._resolve_critical_value()
        reps = self.config.replications
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            decisions = list(executor.map(lambda r: self._replicate(scenario_id, n, r), range(reps)))

        rows = []
        for name in VARIANTS:
            rejections = int(sum(d[name] for d in decisions))
            rows.append({
                'scenario': scenario_id,
                'n': n,
                'variant': name,
                'rejections': rejections,
                'replications': reps,
                'rate_pct': 100.0 * rejections / reps,
            })
        return rows

    def run(self) -> pd.DataFrame:
        """Run every cell and return the long-format rejection table"""
        cfg = self.config
        self._resolve_critical_value()

        if self.persist:
            self.run_id = database.create_run('simulate', cfg.seed, self.manifest.to_dict())

        cells = [(s, n) for s in cfg.scenarios for n in cfg.sample_sizes]
        self.rows = []
        for i, (scenario_id, n) in enumerate(cells, start=1):
            cell_rows = self.run_cell(scenario_id, n)
            self.rows.extend(cell_rows)
            rates = ', '.join(f"{r['variant']}={r['rate_pct']:.1f}%" for r in cell_rows)
            logger.info(f"Progress: {i}/{len(cells)} cells, scenario {scenario_id}, n={n}: {rates}")

        if self.persist:
            database.complete_run(self.run_id, {
                'critical_value': self.critical_value,
                'rows': self.rows,
            })
        return self.rejection_table()

    def rejection_table(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=['scenario', 'n', 'variant', 'rejections', 'replications', 'rate_pct'])

    def wide_table(self) -> pd.DataFrame:
        """Rates in percent, one row per (scenario, n), one column per variant"""
        table = self.rejection_table().pivot(index=['scenario', 'n'], columns='variant', values='rate_pct')
        return table.reindex(columns=list(VARIANTS))

    def rate(self, scenario_id: str, n: int, variant: str) -> float:
        df = self.rejection_table()
        match = df[(df['scenario'] == scenario_id) & (df['n'] == n) & (df['variant'] == variant)]
        if match.empty:
            raise KeyError(f"No result for scenario {scenario_id}, n={n}, variant {variant}")
        return float(match['rate_pct'].iloc[0])

    def save_results(self, path: str, fmt: str = 'csv') -> str:
        """Write the rejection table (csv or json) and its manifest"""
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        table = self.rejection_table()
        if fmt == 'json':
            table.to_json(path, orient='records', indent=2)
        else:
            table.to_csv(path, index=False)
        self.manifest.write_beside(path)
        logger.info(f"Rejection table saved to {path}")
        return path

    def print_summary(self):
        print(f"\nEmpirical rejection rates in percent (alpha={self.config.alpha}, "
              f"critical value {self.critical_value:.4f}, {self.config.replications} replications)")
        print(self.wide_table().round(1).to_string())
        if self.run_id is not None:
            print(f"Stored as simulation run {self.run_id}")
