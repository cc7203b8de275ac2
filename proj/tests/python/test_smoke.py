from fractions import Fraction
from pathlib import Path

import pytest

import selfheal

ASSETS = Path(__file__).resolve().parents[2] / "assets"


def scenario(name):
    return ASSETS / "scenarios" / f"{name}.json"


def test_nominal_target_latency():
    r = selfheal.run_scenario(scenario("ccs_nominal"))
    assert r["injected"] == 0
    assert r["golden_equivalent"]
    first = next(
        line for line in r["trace"].splitlines() if line.endswith(",SIGNAL,Target,50")
    )
    assert first.startswith("35,")


def test_permanent_faults_heal():
    r = selfheal.run_scenario(scenario("ccs_permanent"))
    assert (r["masked"], r["healed"], r["unhealed"]) == (0, 2, 0)
    assert r["heal_latencies_ns"] == [110, 135]
    lat = selfheal.recovery_latency(r["trace"])
    assert [x["latency_ns"] for x in lat] == [110, 135]


def test_golden_matches_shipped_signals():
    ours = selfheal.golden(scenario("edg_nominal"))
    shipped = (ASSETS / "golden" / "edg_nominal.csv").read_text()
    strip = lambda t: [l for l in t.splitlines() if ",SIGNAL," in l]
    assert strip(ours) == strip(shipped)


def test_campaign_csv():
    csv = selfheal.campaign([scenario("ccs_transients"), scenario("ccs_ccf")], threads=2)
    lines = csv.splitlines()
    assert lines[0].startswith("scenario,injected,masked")
    assert lines[1].startswith("ccs_ccf,2,0,0,2,")
    assert lines[2].startswith("ccs_transients,3,3,0,0,")


def test_metrics_exact():
    rows = {r["architecture"]: r for r in selfheal.metrics_table(4, 4)}
    assert rows["proposed"]["overhead_pct"] == 150
    assert selfheal.metrics_table(2, 4)[1]["coverage"] == Fraction(1, 4)
    assert selfheal.render_truncated(Fraction(2, 3)) == "0.666"


def test_property_checker():
    prop = (ASSETS / "props" / "done_correct.prop").read_text()
    bad = (ASSETS / "traces" / "counterexample.csv").read_text()
    good = (ASSETS / "traces" / "counterexample_golden.csv").read_text()
    assert selfheal.check_property(bad, prop, good) == ("VIOLATED", 40)
    assert selfheal.check_property(good, prop, good) == ("HOLDS", None)


def test_place_and_errors():
    text = (ASSETS / "netlists" / "ccs.fbd").read_text()
    assert "\nB,target,L.B2," in selfheal.place(text, 3)
    with pytest.raises(selfheal.SelfHealError, match="config"):
        selfheal.place(text, 2)
    with pytest.raises(selfheal.SelfHealError):
        selfheal.check_property(bad_trace(), "G(nope)")


def bad_trace():
    return "time_ns,kind,name,value\n0,SIGNAL,x,1\n"
