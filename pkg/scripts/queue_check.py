"""Simulated per-user queues against the closed-form stationary behaviour."""

import argparse

from cdma_ra.queue import QueueParams, queue_analytics, simulate_queue


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--arrival-rates", type=float, nargs="+", default=[0.1, 0.3, 0.45])
    ap.add_argument("--service-prob", type=float, default=0.5)
    ap.add_argument("--slots", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'lambda':>7}{'q0':>9}{'q0 sim':>9}{'L':>9}{'L sim':>9}{'sojourn':>9}{'soj. sim':>10}")
    for i, lam in enumerate(args.arrival_rates):
        params = QueueParams(lam, args.service_prob)
        qa = queue_analytics(params)
        sim = simulate_queue(params, args.slots, seed=args.seed + i)
        print(f"{lam:>7.3f}{qa.q0:>9.4f}{sim.q0:>9.4f}{qa.mean_length:>9.4f}{sim.mean_length:>9.4f}"
              f"{qa.mean_sojourn:>9.4f}{sim.mean_sojourn:>10.4f}")


if __name__ == "__main__":
    main()
