import dataclasses
import json
import random
import subprocess
import sys
from pathlib import Path

import pytest

import modtwist
from modtwist.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from modtwist.cyclotomic import SubfieldSpec
from modtwist.errors import InvariantViolation, SchemaError
from modtwist.pipeline import (
    check_j_expansion,
    ingest_fixture,
    records_from_json,
    records_to_json,
    search,
    shipped_fixtures,
    verify,
)
from modtwist.ratfunc import coefficients_in, compose_mobius

from conftest import random_mobius

DATA = Path(modtwist.__file__).parent / "data"
FIXTURES = DATA / "fixtures"
EXPECTED = DATA / "expected"


def raw(name):
    return json.loads((FIXTURES / name).read_text())


# --- ingest -------------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(p.name for p in FIXTURES.glob("*.json")))
def test_shipped_fixtures_pass_the_j_check(name):
    fx = ingest_fixture(FIXTURES / name)
    if fx.hauptmodul is not None:
        assert check_j_expansion(fx.pi_gamma, fx.hauptmodul, depth=5) is None


def test_wrong_conductor_is_an_invariant_violation():
    data = raw("gamma0_5.json")
    data["n"], data["p"] = 1, 7  # K_5 is not inside K_7
    pi = data["pi_gamma"]
    pi["conductor"] = 5
    pi["num"] = [c + ["0/1"] * 3 for c in pi["num"]]
    pi["den"] = [c + ["0/1"] * 3 for c in pi["den"]]
    with pytest.raises(InvariantViolation):
        ingest_fixture(data)


def test_corrupted_coefficient_names_the_exponent():
    data = raw("gamma0_5.json")
    h = data["hauptmodul"]
    assert h["valuation"] == -1
    h["coeffs"][2] = ["10/1"]  # the q^1 coefficient
    with pytest.raises(InvariantViolation) as info:
        ingest_fixture(data)
    assert info.value.exponent == 1


def test_short_hauptmodul_is_rejected():
    data = raw("gamma0_7.json")
    data["hauptmodul"]["precision"] = 1
    with pytest.raises(InvariantViolation):
        ingest_fixture(data)


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("pi_gamma"),
    lambda d: d.update(p=6),
    lambda d: d.update(n=0),
    lambda d: d.update(label=""),
    lambda d: d["pi_gamma"].update(num="oops"),
])
def test_bad_schema(mutate):
    data = raw("gamma0_3.json")
    mutate(data)
    with pytest.raises(SchemaError):
        ingest_fixture(data)


def test_unreadable_file(tmp_path):
    bad = tmp_path / "x.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError):
        ingest_fixture(bad)


# --- search --------------------------------------------------------------------------------


def test_level_three_search_matches_shipped_output():
    fx = shipped_fixtures()["Gamma(3)"]
    assert records_to_json(search(fx)) == (EXPECTED / "gamma_3.json").read_text()


@pytest.mark.parametrize("label", ["Gamma(3)-shifted", "Gamma0(9)", "Gamma(2)"])
def test_search_is_deterministic_across_workers(label):
    fx = shipped_fixtures()[label]
    assert records_to_json(search(fx, workers=1)) == records_to_json(search(fx, workers=3))


def test_records_make_the_map_rational():
    fixtures = shipped_fixtures()
    for rec in records_from_json((EXPECTED / "gamma_2.json").read_text()):
        if rec.A is None:
            continue
        comp = compose_mobius(fixtures[rec.fixture].pi_gamma.embed(rec.A.field.N), rec.A)
        assert coefficients_in(comp, rec.K.restrict_to(rec.A.field.N))


def test_records_are_pairwise_non_isomorphic():
    from modtwist.pipeline import _k_isomorphic

    recs = [r for r in records_from_json((EXPECTED / "gamma_3.json").read_text()) if r.twisted is not None]
    for r1, r2 in zip(recs, recs[1:]):
        if r1.K == r2.K:
            assert not _k_isomorphic(r1.twisted, r2.twisted, r1.K)


def test_search_rejects_unknown_route():
    with pytest.raises(ValueError):
        search(shipped_fixtures()["Gamma0(3)"], route="guess")


def test_record_json_round_trip():
    text = (EXPECTED / "gamma0_9.json").read_text()
    assert records_to_json(records_from_json(text)) == text


# --- verify ---------------------------------------------------------------------------------


def test_shipped_records_verify():
    fixtures = shipped_fixtures()
    for path in sorted(EXPECTED.glob("*.json")):
        rep = verify(records_from_json(path.read_text()), fixtures)
        assert rep.ok, rep.text()


def _a_record():
    return next(r for r in records_from_json((EXPECTED / "gamma_3.json").read_text()) if r.A is not None)


def test_random_matrix_fails_rationality():
    rec = _a_record()
    rng = random.Random(0)
    bad = dataclasses.replace(rec, A=random_mobius(rec.A.field, rng, height=3), twisted=None)
    rep = verify([bad], shipped_fixtures())
    rows = {c: ok for c, ok, _ in rep.rows_for(bad.label)}
    assert rows["rational"] is False
    assert not rep.ok


def test_rational_field_is_out_of_scope():
    rec = dataclasses.replace(_a_record(), K=SubfieldSpec(1, []))
    rep = verify([rec], shipped_fixtures())
    rows = {c: ok for c, ok, _ in rep.rows_for(rec.label)}
    assert rows["scope"] is False


def test_unknown_fixture_is_reported():
    rec = dataclasses.replace(_a_record(), fixture="Gamma0(97)")
    rep = verify([rec], shipped_fixtures())
    assert rep.failures()[0][1] == "fixture"


def test_malformed_record():
    with pytest.raises(SchemaError):
        records_from_json('[{"label": "x"}]')
    with pytest.raises(SchemaError):
        records_from_json('{"label": "x"}')


# --- command line ---------------------------------------------------------------------------------


def test_cli_selftest(capsys):
    assert main(["selftest"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and "PASS" in out


@pytest.mark.parametrize("name", ["gamma_3.json", "gamma0_16.json", "gamma_2.json"])
def test_cli_verify_shipped(name, capsys):
    assert main(["verify", str(EXPECTED / name)]) == EXIT_OK
    assert "records, 0 failed checks" in capsys.readouterr().out


def test_cli_malformed_fixture(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"label": "x", "p": 4, "n": 1}))
    assert main(["autgroup", str(bad)]) == EXIT_USAGE
    assert "schema error" in capsys.readouterr().err


def test_cli_corrupt_j_expansion(tmp_path, capsys):
    data = raw("gamma0_5.json")
    data["hauptmodul"]["coeffs"][2] = ["10/1"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    assert main(["search", str(bad)]) == EXIT_USAGE
    assert "q^1" in capsys.readouterr().err


def test_cli_verify_failing_record(tmp_path):
    rec = dataclasses.replace(_a_record(), K=SubfieldSpec(1, []))
    path = tmp_path / "recs.json"
    path.write_text(records_to_json([rec]))
    assert main(["verify", str(path)]) == EXIT_FAIL


def test_cli_bad_arguments(capsys):
    assert main(["search"]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE


def test_cli_search_and_verify_json(tmp_path, capsys):
    out = tmp_path / "out.json"
    fx = str(FIXTURES / "gamma_3.json")
    assert main(["search", fx, "--out", str(out)]) == EXIT_OK
    assert out.read_text() == (EXPECTED / "gamma_3.json").read_text()
    capsys.readouterr()
    assert main(["verify", str(out), "--json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["ok"] is True


def test_cli_rational_subfield_rejected(capsys):
    # the subgroup generated by 2 mod 3 fixes Q
    assert main(["search", str(FIXTURES / "gamma_3.json"), "--subfield", "2"]) == EXIT_USAGE


def test_cli_autgroup_json(capsys):
    assert main(["autgroup", str(FIXTURES / "gamma_2.json"), "--json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert len(data["aut"]) == 6 and data["b"] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "modtwist", "verify", str(EXPECTED / "gamma0_3.json")],
                         capture_output=True, text=True, timeout=120)
    assert res.returncode == EXIT_OK, res.stderr
