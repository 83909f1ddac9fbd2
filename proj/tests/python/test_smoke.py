"""Smoke test for the python bindings; runs with plain python, no test deps."""

import json
import math

import dipcoal as dc


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def expect_raises(exc, fn, *args):
    try:
        fn(*args)
    except exc:
        return
    raise AssertionError(f"expected {exc.__name__} from {fn}")


def main():
    assert dc.__version__

    # rate engine against hand-computed dyadic values
    beta = dc.Measure.parse("beta(4,1.5)")
    assert beta.normalized and close(beta.total_mass, 1.0)
    assert dc.rate(beta, dc.MergerSpec(2, [2], 0)) == 1.0
    assert close(dc.rate(beta, dc.MergerSpec(3, [2], 1)), 0.9375)
    assert close(dc.rate(beta, dc.MergerSpec(4, [2, 2], 0)), 0.0234375)
    spec = dc.MergerSpec(4, [3], 1)
    assert close(dc.rate_quadrature(beta, spec), dc.rate(beta, spec), 1e-8)
    assert spec.multiplicity() == 4.0
    king = dc.Measure.kingman()
    assert dc.rate(king, dc.MergerSpec(5, [3], 2)) == 0.0
    assert dc.consistency_check(beta, 6) < 1e-10
    expect_raises(ValueError, dc.Measure.beta, 4, 2.5)

    # JSON round trip for measures
    again = dc.Measure.from_json(beta.to_json())
    assert again.id == beta.id

    # generator rows sum to zero, absorbing state is inert
    gen = dc.generator_matrix(king, 4)
    assert gen.shape == (15, 15)
    for row in gen:
        assert abs(sum(row)) < 1e-9
    assert all(v == 0.0 for v in gen[-1])

    # state-space sizes
    assert len(dc.partitions(4)) == 15
    assert len(dc.diploid_states(3)) == 11

    # coalescent trajectories: deterministic in the seed, well formed
    r1 = dc.simulate_coalescent(beta, 8, 42)
    r2 = dc.simulate_coalescent(beta, 8, 42)
    assert r1.times == r2.times and r1.states == r2.states
    assert r1.absorbed and not r1.discrete
    assert len(r1.times) == r1.n_events + 1
    assert all(t < u for t, u in zip(r1.times, r1.times[1:]))
    assert close(r1.tmrca, r1.times[-1])
    assert close(sum(r1.branch_lengths), r1.total_length, 1e-9)

    # models from JSON
    wf = dc.Model.from_json('{"type":"wright-fisher","n_pop":200}')
    assert wf.population_size == 200
    assert wf.pair_coalescence_prob == 1.0 / 400.0
    assert json.loads(wf.to_json())["n_pop"] == 200
    assert "wright-fisher" in repr(wf)
    expect_raises(dc.ConfigError, dc.Model.from_json,
                  '{"type":"wright-fisher","n_pop":200,"bogus":1}')
    rf = dc.Model.from_json(
        '{"type":"random-fitness","n_pop":100,'
        '"fitness":{"type":"pareto","alpha":1.5,"scale":1.0}}')
    assert rf.pair_coalescence_prob is None

    # one offspring matrix: sorted sparse triples, mass conserved
    triples = dc.sample_offspring(wf, 3)
    assert sum(c for _, _, c in triples) == 200
    assert all(i < j for i, j, _ in triples)
    assert triples == sorted(triples)

    # estimators
    est = dc.estimate_cn(wf, 400, 7)
    assert est.replicates == 400
    assert abs(est.value - 1.0 / 400.0) <= 6.0 * est.std_error + 1e-9
    phi = dc.estimate_phi(wf, [2], 200, 5)
    assert close(phi.value, 2.0 * 199.0 / 200.0, 1e-9)
    assert close(dc.tail_scaling_limit(1.5, x=0.5),
                 8.0 / (1.5 * math.pi / 2.0))

    # discrete genealogy
    rec = dc.run_genealogy(wf, 4, 9)
    assert rec.discrete and rec.absorbed
    assert all(float(t).is_integer() for t in rec.times)

    # one-step matrix decomposition: fixed couples have c = 1/(4M) exactly
    fc = dc.Model.from_json('{"type":"fixed-couples","n_couples":30}')
    md = dc.mohle(fc, 2, 20000, 13)
    assert close(md.c_hat, 1.0 / 120.0)
    assert len(md.states) == 3
    p2 = md.P @ md.P
    assert abs(p2 - md.P).max() < 1e-12
    # dispersed pair merges at rate ~1 on the c-timescale
    assert abs(md.G[0, -1] - 1.0) < 0.25

    # recipes surface their verdicts
    names = dc.recipe_names()
    assert "wf-kingman" in names
    report = dc.run_recipe("rate-engine", 1)
    assert report["pass"] and report["verdicts"]
    assert {"test", "statistic", "threshold", "pass", "seed"} <= set(
        report["verdicts"][0])

    print("python smoke: all checks passed")


if __name__ == "__main__":
    main()
