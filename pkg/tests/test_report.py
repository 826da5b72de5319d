import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nblab import report as rp
from nblab.report import ProvenancedValue as PV

finite = st.floats(allow_nan=False, allow_infinity=False)


@given(st.lists(st.lists(finite, min_size=3, max_size=3), min_size=1, max_size=4))
def test_matrix_round_trip_bitwise(rows):
    import tempfile
    with tempfile.TemporaryDirectory() as d:
        p = rp.emit_matrix(rows, f"{d}/m.csv")
        back = rp.read_matrix(p)
    assert back.shape == (len(rows), 3)
    assert all(float(a).hex() == float(b).hex() for a, b in zip(np.ravel(rows), back.ravel()))


def test_matrix_header_and_sidecar(tmp_path):
    m = [[PV(1.0, 1e-9, "a"), PV(0.5, 0.0, "b")], [PV(0.5, 0.0, "b"), PV(2.0, 1e-3, "a")]]
    p = rp.emit_matrix(m, tmp_path / "g.csv", meta={"family": "x"})
    h = rp.read_header(p)
    assert h["symmetric"] is True and h["shape"] == [2, 2] and h["routes"] == ["a", "b"]
    assert h["family"] == "x"
    err = rp.read_table(str(p) + ".err.csv")
    assert err[3]["est_error"] == 1e-3 and err[0]["route"] == "a"


def test_asymmetric_flag(tmp_path):
    p = rp.emit_matrix([[1.0, 0.2], [0.3, 1.0]], tmp_path / "a.csv")
    assert rp.read_header(p)["symmetric"] is False
    p = rp.emit_matrix([[1.0, 0.2], [0.3, 1.0]], tmp_path / "b.csv", sym_tol=0.2)
    assert rp.read_header(p)["symmetric"] is True


def test_interleaved_errors(tmp_path):
    p = rp.emit_matrix([[PV(1.0, 0.25)]], tmp_path / "i.csv", sidecar=False)
    assert rp.read_matrix(p).tolist() == [[1.0, 0.25]]


def test_nan_entry_located(tmp_path):
    with pytest.raises(ValueError, match=r"\(1, 0\)"):
        rp.emit_matrix([[1.0, 2.0], [math.nan, 1.0]], tmp_path / "n.csv")
    with pytest.raises(ValueError):
        rp.emit_matrix([[1.0], [1.0, 2.0]], tmp_path / "r.csv")


def test_table_round_trip(tmp_path):
    rows = [{"n": 1, "D2": 0.1 + 0.2, "status": "ok"}, {"n": 2, "D2": None, "status": "refused: x"}]
    p = rp.emit_table(rows, ["n", "D2", "status"], tmp_path / "t.csv", meta={"note": "hi"})
    back = rp.read_table(p)
    assert back[0] == {"n": 1, "D2": 0.30000000000000004, "status": "ok"}
    assert back[1]["D2"] is None
    assert rp.read_header(p)["note"] == "hi"


def test_provenanced_value_validation():
    with pytest.raises(ValueError):
        PV(1.0, -1e-3)
    with pytest.raises(ValueError):
        PV(1.0, math.nan)
    with pytest.raises(ValueError):
        PV(1.0, 0.0, "")
    pv = PV(0.1, 1e-12, "quad", 30.0)
    assert PV.from_json(pv.to_json()) == pv
    assert PV(1.0).to_json()["truncation"] is None


def test_json_numpy_and_nan(tmp_path):
    obj = {"a": np.arange(3), "b": np.float64(0.1), "c": PV(1.0), "d": math.nan}
    p = rp.write_json(obj, tmp_path / "x.json")
    back = rp.read_json(p)
    assert back["a"] == [0, 1, 2] and back["b"] == 0.1 and back["c"]["route"] == "direct"
    assert math.isnan(back["d"])
    with pytest.raises(TypeError):
        rp.dumps({"x": object()})


@given(finite)
def test_fmt_lossless(x):
    assert float(rp.fmt(x)) == x
