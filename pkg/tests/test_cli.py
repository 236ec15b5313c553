import json

import numpy as np
import pytest

from qrv import serialize
from qrv.cli import main
from qrv.worked_examples import (joe_verducci_instance, malamud_instance,
                                 nine_eleven_instance)


@pytest.fixture
def nine_files(tmp_path):
    nu, f = nine_eleven_instance()
    povm = tmp_path / "povm.json"
    qrv = tmp_path / "qrv.json"
    serialize.dump(serialize.povm_to_json(nu), povm)
    serialize.dump(serialize.qrv_to_json(f), qrv)
    return str(povm), str(qrv)


@pytest.fixture
def malamud_files(tmp_path):
    space, f, g = malamud_instance()
    paths = {}
    for name, doc in (("f", serialize.qrv_to_json(f)),
                      ("g", serialize.qrv_to_json(g)),
                      ("space", serialize.space_to_json(space))):
        p = tmp_path / f"{name}.json"
        serialize.dump(doc, p)
        paths[name] = str(p)
    return paths


def read(path):
    with open(path) as fh:
        return json.load(fh)


def test_integrate_verb(nine_files, tmp_path, capsys):
    povm, qrv = nine_files
    out = tmp_path / "out.json"
    assert main(["integrate", "--povm", povm, "--qrv", qrv,
                 "--out", str(out)]) == 0
    doc = read(out)
    assert np.isclose(doc["result"]["norm"], 9.0)
    assert doc["result"]["matrix"][0][0] == [7.0, 0.0]
    capsys.readouterr()


def test_rn_verb(nine_files, capsys):
    povm, _ = nine_files
    assert main(["rn", "--povm", povm]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["result"]["masses"] == [1.0, 1.0]


def test_norm1_and_verify_roundtrip(nine_files, tmp_path, capsys):
    povm, qrv = nine_files
    cert = tmp_path / "cert.json"
    assert main(["norm1", "--povm", povm, "--qrv", qrv,
                 "--certificate", str(cert)]) == 0
    doc = read(cert)
    assert abs(doc["result"]["value"] - 9.0) <= 1e-6
    capsys.readouterr()
    assert main(["verify", "--certificate", str(cert)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["ok"]


def test_verify_rejects_tampered_certificate(nine_files, tmp_path, capsys):
    povm, qrv = nine_files
    cert = tmp_path / "cert.json"
    main(["norm1", "--povm", povm, "--qrv", qrv, "--certificate", str(cert)])
    doc = read(cert)
    doc["result"]["dual_lower_bound"] = doc["result"]["value"] + 1.0
    serialize.dump(doc, cert)
    capsys.readouterr()
    assert main(["verify", "--certificate", str(cert)]) == 4


def test_bracket_verb(nine_files, tmp_path, capsys):
    povm, qrv = nine_files
    gfile = tmp_path / "g.json"
    serialize.dump({"values": [[1.0, 0.0], [1.0, 0.0]]}, gfile)
    assert main(["bracket", "--povm", povm, "--qrv", qrv,
                 "--g", str(gfile)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert np.isclose(doc["result"]["norm"], 9.0)


def test_majorize_verbs_and_verify(malamud_files, tmp_path, capsys):
    out = tmp_path / "cert.json"
    for order, verdict in (("b", "fails"), ("t", "holds"), ("s", "holds")):
        args = ["majorize", "--order", order, "--f", malamud_files["f"],
                "--g", malamud_files["g"], "--space", malamud_files["space"],
                "--certificate", str(out), "--seed", "7"]
        if order == "s":
            args += ["--samples", "500"]
        assert main(args) == 0
        assert read(out)["result"]["verdict"] == verdict
        capsys.readouterr()
        assert main(["verify", "--certificate", str(out)]) == 0
        capsys.readouterr()


def test_separate_verb(malamud_files, tmp_path, capsys):
    out = tmp_path / "sep.json"
    assert main(["separate", "--f", malamud_files["f"],
                 "--g", malamud_files["g"], "--space", malamud_files["space"],
                 "--certificate", str(out)]) == 0
    doc = read(out)
    assert doc["result"]["margin"] >= 1e-6
    capsys.readouterr()
    assert main(["verify", "--certificate", str(out)]) == 0
    capsys.readouterr()


def test_norm1_stall_emits_honest_certificate(nine_files, tmp_path, capsys):
    povm, qrv = nine_files
    cert = tmp_path / "cert.json"
    code = main(["norm1", "--povm", povm, "--qrv", qrv, "--tol", "1e-16",
                 "--certificate", str(cert)])
    assert code == 3
    doc = read(cert)
    assert abs(doc["result"]["value"] - 9.0) <= 1e-6
    assert doc["result"]["gap"] > 1e-16
    capsys.readouterr()


def test_validation_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"space": {"atoms": ["a"]}, "dim": 2, "effects": '
                   '{"a": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]}}')
    qrv = tmp_path / "q.json"
    nu, f = nine_eleven_instance()
    serialize.dump(serialize.qrv_to_json(f), qrv)
    assert main(["integrate", "--povm", str(bad), "--qrv", str(qrv)]) == 2
    assert main(["integrate", "--povm", str(tmp_path / "absent.json"),
                 "--qrv", str(qrv)]) == 2
    capsys.readouterr()


def test_byte_identical_reruns(nine_files, tmp_path):
    povm, qrv = nine_files
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["norm1", "--povm", povm, "--qrv", qrv, "--out", str(a)])
    main(["norm1", "--povm", povm, "--qrv", qrv, "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_property_suite_trials_zero_and_determinism(tmp_path, capsys):
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(["property-suite", "--trials", "0", "--out", str(out1)]) == 0
    assert read(out1)["total_violations"] == 0
    assert main(["property-suite", "--trials", "2", "--seed", "9",
                 "--out", str(out1)]) == 0
    assert main(["property-suite", "--trials", "2", "--seed", "9",
                 "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    capsys.readouterr()


def test_paper_examples_list_and_single(tmp_path, capsys):
    assert main(["paper-examples", "--list"]) == 0
    names = capsys.readouterr().out.split()
    assert "nine-eleven" in names and "malamud" in names
    assert main(["paper-examples", "--only", "triangle-abs"]) == 0
    capsys.readouterr()


def test_majorize_joe_verducci_certificates(tmp_path, capsys):
    space, f, g = joe_verducci_instance()
    paths = {}
    for name, doc in (("f", serialize.qrv_to_json(f)),
                      ("g", serialize.qrv_to_json(g)),
                      ("space", serialize.space_to_json(space))):
        p = tmp_path / f"{name}.json"
        serialize.dump(doc, p)
        paths[name] = str(p)
    out = tmp_path / "cert.json"
    assert main(["majorize", "--order", "t", "--f", paths["f"], "--g",
                 paths["g"], "--space", paths["space"],
                 "--certificate", str(out)]) == 0
    doc = read(out)
    assert doc["result"]["verdict"] == "fails"
    assert doc["result"]["margin"] >= 0.9
    capsys.readouterr()
    assert main(["verify", "--certificate", str(out)]) == 0
    capsys.readouterr()
