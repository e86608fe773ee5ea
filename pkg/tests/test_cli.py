import io
import json
import subprocess
import sys

import pytest

from squarefulsum import cli


def run(*argv):
    buf = io.StringIO()
    code = cli.main(list(argv), out=buf)
    return code, buf.getvalue()


def one(*argv):
    code, out = run(*argv)
    assert code == 0, out
    return json.loads(out)


def test_count_record_shape():
    r = one("count", "--max", "10")
    assert r["tool"] == "squarefulsum" and r["result"]["count"] == 24
    assert "threads" not in r["config"]


def test_sigma_inf_definite():
    assert one("sigma-inf", "--signs", "++++")["result"]["value"] == 0


def test_verify_small_grid():
    r = one("verify", "--suite", "inclusion-exclusion", "--max", "10", "--ymax", "10")["result"]
    assert r["equal"] and r["lhs"] == r["rhs"] == 24


def test_verify_failure_exit_code():
    code, out = run("verify", "--suite", "inclusion-exclusion", "--max", "100", "--ymax", "5")
    assert code == cli.EXIT_INCONSISTENT
    assert json.loads(out)["result"]["equal"] is False


def test_no_timing_is_thread_independent():
    a = run("--no-timing", "--threads", "1", "count", "--max", "2000", "--ymax", "30")[1]
    b = run("--no-timing", "--threads", "8", "count", "--max", "2000", "--ymax", "30")[1]
    assert a == b and "seconds" not in a


def test_tail_csv():
    code, out = run("--format", "csv", "tail", "--max", "1000", "--ymin", "1,2,4")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("B,D,count") and len(lines) == 4


def test_density_and_level():
    assert one("density", "--y", "1,1,1,-1", "--p", "3")["result"]["value"] == "20/27"
    assert one("density", "--y", "1,1,1,-1", "--p", "3", "--level", "1")["result"] == {"M": 20, "N": 21}


def test_series_quadric_boxes_squareful():
    assert abs(one("series", "--a", "1,1,1,-1")["result"]["value"] - 0.8574537825) < 1e-9
    q = one("quadric", "--a", "1,1,1,-2", "--max", "1000")["result"]
    assert q["count"] > 0 and 0.5 < q["ratio"] < 1.5
    assert one("boxes", "--x", "1,1,1,1", "--y", "1,1,1,1")["result"]["count"] == 6 * 16  # two signs of y each way, x signs free
    assert one("squareful", "--max", "100")["result"]["count"] == 14


@pytest.mark.parametrize(
    "argv,code",
    [
        (["count", "--max", "10", "--bogus"], 1),
        (["--format", "csv", "count", "--max", "10"], 1),
        (["--threads", "0", "count", "--max", "10"], 1),
        (["count", "--max", "-3"], 2),
        (["density", "--y", "1,1,1,4", "--p", "3"], 2),
        (["boxes", "--x", "1,1,1", "--y", "1,1,1,1"], 1),
        (["count", "--max", "200000", "--naive"], 4),
    ],
)
def test_exit_codes(argv, code):
    assert run(*argv)[0] == code


def test_console_entry_point():
    p = subprocess.run([sys.executable, "-m", "squarefulsum.cli", "count", "--max", "10"], capture_output=True, text=True)
    assert p.returncode == 0 and json.loads(p.stdout)["result"]["count"] == 24
