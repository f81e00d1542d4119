#!/usr/bin/env python3
"""
Reproduce the empirical rejection-rate table: scenarios A-F, n = 100..500,
1000 replications, alpha = 0.10, d = 1, four statistic variants.
"""

import argparse
import logging
import os
import sys

from fcpd.config import get_log_level
from fcpd.critval import CritvalConfig
from fcpd.database import init_database
from fcpd.datagen import SCENARIOS
from fcpd.simulation import DEFAULT_SAMPLE_SIZES, RejectionStudy, StudyConfig


def run_simulation(config: StudyConfig, threads=None, persist=True):
    """
    Run one rejection study and print its table

    Args:
        config: scenarios, sample sizes, replications and seed
        threads: worker threads (default FCPD_THREADS)
        persist: store the run in the database
    """
    print(f"\n{'='*60}")
    print(f"Rejection study: scenarios {', '.join(config.scenarios)}, n = {list(config.sample_sizes)}, "
          f"{config.replications} replications, seed {config.seed}")
    print(f"{'='*60}")

    study = RejectionStudy(config, threads=threads, persist=persist)
    study.run()
    study.print_summary()

    filename = os.path.join('results', f"rejection_rates_seed{config.seed}_reps{config.replications}.csv")
    study.save_results(filename)
    print(f"Summary results saved to {filename}")
    return study


def main():
    parser = argparse.ArgumentParser(description='Reproduce the rejection-rate table')
    parser.add_argument('--scenarios', nargs='+', default=list(SCENARIOS),
                        help='Scenarios to run (default: A B C D E F)')
    parser.add_argument('--n', nargs='+', type=int, default=list(DEFAULT_SAMPLE_SIZES),
                        help='Sample sizes (default: 100 200 300 400 500)')
    parser.add_argument('--reps', type=int, default=1000, help='Replications per cell (default: 1000)')
    parser.add_argument('--seed', type=int, default=1, help='Base seed (default: 1)')
    parser.add_argument('--alpha', type=float, default=0.10, help='Level (default: 0.10)')
    parser.add_argument('--psi', type=float, default=None, help='FAR(1) noise with this operator norm')
    parser.add_argument('--threads', type=int, default=None, help='Worker threads (default: FCPD_THREADS)')
    parser.add_argument('--no-db', action='store_true', help='Do not store the run in the database')

    args = parser.parse_args()
    logging.basicConfig(level=get_log_level(), format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    try:
        config = StudyConfig(
            scenarios=tuple(args.scenarios), sample_sizes=tuple(args.n), replications=args.reps,
            seed=args.seed, alpha=args.alpha, psi_norm=args.psi, critval=CritvalConfig(),
        )
    except ValueError as e:
        print(f"Error: {e}")
        sys.exit(1)

    if not args.no_db:
        print("Initializing database...")
        init_database()

    try:
        study = run_simulation(config, threads=args.threads, persist=not args.no_db)
        print(f"\n{'='*60}")
        print("SIMULATION COMPLETED")
        print(f"{'='*60}")
        if study.run_id is not None:
            print(f"Run ID: {study.run_id} (see /api/run/{study.run_id} in app.py)")
    except KeyboardInterrupt:
        print("\nSimulation interrupted by user")
        sys.exit(1)
    except Exception as e:
        print(f"\nError during simulation: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)


if __name__ == "__main__":
    main()
