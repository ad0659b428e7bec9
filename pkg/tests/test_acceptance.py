"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with the measured value and its tolerance."""

from itertools import permutations

import numpy as np

from qbcsim import adversary as adv
from qbcsim import channels as ch
from qbcsim import cli
from qbcsim import harness as h
from qbcsim import protocol as pr
from qbcsim import qudits as q

TOL = 1e-9
ATTACK_SLACK = 1e-6


def announce(capfd, number: int, name: str, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    with capfd.disabled():
        print(f"CRITERION {number} {name}: {status} ({detail})", flush=True)


def perms_for(d: int, rng: np.random.Generator, samples: int = 64):
    if d <= 4:
        return list(permutations(range(d)))
    return [q.random_permutation(d, rng) for _ in range(samples)]


def test_criterion_1_state_level_hiding(capfd):
    worst = 0.0
    for d in (2, 3, 4):
        params = pr.ProtocolParams(d)
        target = np.eye(d) / d
        for perm in permutations(range(d)):
            for bit in (0, 1):
                for m in range(d):
                    state = pr.post_commit_state(params, bit, perm, m)
                    red = q.reduced_state(state, keep=(pr.BOB_FACTOR,))
                    worst = max(worst, float(np.max(np.abs(red.entries - target))))
    passed = worst <= TOL
    announce(capfd, 1, "state-level hiding", passed,
             f"max deviation {worst:.3e}, tolerance {TOL:.0e}, d in 2..4, "
             f"exhaustive permutations")
    assert passed


def test_criterion_2_channel_level_hiding(capfd):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for d in (2, 3):
        exact0 = ch.averaged_measurement_channel(0, d, "exact")
        exact1 = ch.averaged_measurement_channel(1, d, "exact")
        closed = ch.averaged_measurement_channel(0, d, "closed_form")
        shape = q.RegisterShape((d,) * 5)
        for _ in range(50):
            rho = q.random_density(shape, rng)
            out0 = exact0.apply(rho).entries
            worst = max(worst, float(np.max(np.abs(out0 - exact1.apply(rho).entries))))
            worst = max(worst, float(np.max(np.abs(out0 - closed.apply(rho).entries))))
    passed = worst <= TOL
    announce(capfd, 2, "channel-level hiding", passed,
             f"max deviation {worst:.3e}, tolerance {TOL:.0e}, 50 states per d in 2..3")
    assert passed


def test_criterion_3_honest_completeness(capfd):
    worst = 0.0
    for d in (2, 3, 4):
        params = pr.ProtocolParams(d)
        for perm in permutations(range(d)):
            for bit in (0, 1):
                states = [pr.post_commit_state(params, bit, perm, m) for m in range(d)]
                stacked = np.stack([s.amplitudes for s in states])
                gram = stacked.conj() @ stacked.T
                worst = max(worst, float(np.max(np.abs(gram - np.eye(d)))))
                for m in range(d):
                    record = pr.CommitmentRecord(bit, perm, m, states[m])
                    accept = pr.open_verify(record, bit, perm, states[m].density())
                    worst = max(worst, abs(1.0 - accept))
    passed = worst <= TOL
    announce(capfd, 3, "honest completeness", passed,
             f"max deviation {worst:.3e}, tolerance {TOL:.0e}, exhaustive (bit, "
             f"permutation, outcome) for d in 2..4")
    assert passed


def test_criterion_4_family_structure(capfd):
    rng = np.random.default_rng(4)
    worst = 0.0
    for d in (2, 3, 4, 5):
        params = pr.ProtocolParams(d)
        cuts = pr.alice_cuts(params)
        target = np.eye(d) / d
        for perm in perms_for(d, rng):
            for m in range(d):
                entangled = pr.post_commit_schmidt(params, 0, perm, m)
                for left in entangled.left_vectors:
                    for qudit in range(3):
                        red = q.reduced_state(left, keep=(qudit,))
                        worst = max(worst, float(np.max(np.abs(red.entries - target))))
                product = pr.post_commit_schmidt(params, 1, perm, m)
                for left in product.left_vectors:
                    for cut in cuts:
                        data = q.schmidt_decompose(left, cut)
                        worst = max(worst, 1.0 - data.max_coefficient)
    passed = worst <= TOL
    announce(capfd, 4, "family structure", passed,
             f"max deviation {worst:.3e}, tolerance {TOL:.0e}, d in 2..5, "
             f"exhaustive permutations to d=4, 64 sampled at d=5")
    assert passed


def test_criterion_5_bound_respect(capfd):
    rng = np.random.default_rng(5)
    pairs = 1000
    worst = -np.inf
    for d in (2, 3):
        cut = q.Bipartition.of(q.RegisterShape((d, d)), {0})
        for _ in range(pairs):
            terms = int(rng.integers(1, d + 1))
            instance = adv.random_instance(terms, cut, rng, "0to1")
            channel = ch.random_separable_channel(cut, int(rng.integers(1, 4)), rng)
            cap_ent, cap_prod = adv.analytic_bounds(instance)
            worst = max(worst, adv.switch_probability(instance, channel) - cap_ent)
            worst = max(worst,
                        adv.switch_probability(instance.reversed(), channel) - cap_prod)
    passed = worst <= TOL
    announce(capfd, 5, "bound respect", passed,
             f"max margin {worst:.3e} <= {TOL:.0e}, {pairs} instance/channel pairs "
             f"per d in 2..3, both directions, zero violations")
    assert passed


def test_criterion_6_nogo_reproduction(capfd):
    rng = np.random.default_rng(6)
    worst = 0.0
    for d in (2, 3, 4):
        params = pr.ProtocolParams(d)
        cut = pr.alice_cuts(params)[0]
        for perm in [tuple(range(d))] + [q.random_permutation(d, rng) for _ in range(3)]:
            for m in range(d):
                for direction in ("0to1", "1to0"):
                    instance = adv.protocol_instance(params, perm, m, cut, direction)
                    _, achieved = adv.unrestricted_attack(instance)
                    worst = max(worst, abs(1.0 - achieved))
    passed = worst <= TOL
    announce(capfd, 6, "no-go reproduction", passed,
             f"max |1 - p| {worst:.3e}, tolerance {TOL:.0e}, d in 2..4, both directions")
    assert passed


def test_criterion_7_binding_at_desk_scale(capfd):
    # Default optimizer configuration; thresholds frozen against the d=2
    # product-unitary brute-force search plus the exact identity-channel
    # evaluation (both directions reach exactly 1/2 there).
    results = {}
    for d in (2, 3):
        report = h.run_suite(h.RunConfig(d=d, seed=7, suites=("attack",)))
        for direction in ("0to1", "1to0"):
            results[(d, direction)] = max(
                a.achieved_p for a in report.attacks if a.direction == direction
            )
    ok_d2 = all(0.45 <= results[(2, direction)] <= 0.5 + ATTACK_SLACK
                for direction in ("0to1", "1to0"))
    ok_d3 = all(results[(3, direction)] <= 1 / 3 + ATTACK_SLACK
                for direction in ("0to1", "1to0"))
    passed = ok_d2 and ok_d3
    detail = ", ".join(
        f"d={d} {direction}: {p:.9f}" for (d, direction), p in sorted(results.items())
    )
    announce(capfd, 7, "separable binding", passed,
             f"{detail}; windows [0.45, 0.5+1e-6] at d=2 and <= 1/3+1e-6 at d=3")
    assert passed


def test_criterion_8_cheat_bound_grid(capfd):
    worst = 0.0
    for n in range(2, 7):
        for d in range(2, 6):
            worst = max(worst, abs(adv.separable_cheat_bound(n, d) - 1.0 / d))
    passed = worst == 0.0
    announce(capfd, 8, "cheat bound grid", passed,
             f"max |bound - 1/d| {worst:.1e} over n in 2..6, d in 2..5, exact")
    assert passed


def test_criterion_9_determinism(capfd, tmp_path):
    verify_args = ["verify", "--d", "3", "--suites", "hiding,structure,lemma",
                   "--seed", "13"]
    attack_args = ["attack", "--d", "2", "--seed", "13", "--restarts", "3",
                   "--iterations", "120"]
    blobs = {}
    for label, args, fmt in (
        ("verify", verify_args, "json"),
        ("attack", attack_args, "json"),
        ("attack-csv", attack_args, "csv"),
    ):
        pair = []
        for run in (0, 1):
            out = tmp_path / f"{label}-{run}.{fmt}"
            code = cli.main(args + ["--out", str(out), "--format", fmt])
            assert code == 0
            pair.append(out.read_bytes())
        blobs[label] = pair
    passed = all(a == b for a, b in blobs.values())
    announce(capfd, 9, "byte-identical reports", passed,
             "verify and attack emitted identical bytes on repeated runs "
             "with identical flags and seed")
    assert passed
