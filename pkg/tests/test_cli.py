"""Command-line interface: reports, determinism, exit codes."""

import numpy as np
import pytest

from polytoep import write_symbol
from polytoep.cli import JobConfig, main, run

from conftest import boundary_partial_isometry, nilpotent_shift, scalar_symbol


@pytest.fixture
def theta_doc(tmp_path):
    path = tmp_path / "theta.json"
    write_symbol(nilpotent_shift(), path)
    return str(path)


@pytest.fixture
def scalar_pair_docs(tmp_path):
    p1 = tmp_path / "z1.json"
    p2 = tmp_path / "z2.json"
    write_symbol(scalar_symbol(2, {(1, 0): 1.0}), p1)
    write_symbol(scalar_symbol(2, {(0, 1): 1.0}), p2)
    return str(p1), str(p2)


def test_classify_nilpotent_partial_isometry_but_not_isometry(theta_doc, capsys):
    status = main(["classify", theta_doc, "-D", "6"])
    out = capsys.readouterr().out
    assert "check name=partial_isometry verdict=pass" in out
    assert "check name=isometry verdict=fail" in out
    assert "check name=inner_symbol verdict=fail" in out
    assert "check name=toeplitz verdict=pass" in out
    assert status == 1  # isometry and unitary legitimately fail


def test_classify_constant_unitary_all_green(tmp_path, capsys):
    u = np.array([[0.0, 1.0], [1.0, 0.0]])
    path = tmp_path / "u.json"
    from polytoep import LaurentSymbol
    write_symbol(LaurentSymbol.constant(u, 1), path)
    status = main(["classify", str(path), "-D", "5"])
    out = capsys.readouterr().out
    assert status == 0
    assert "verdict=fail" not in out


def test_check_product_disjoint_monomials_passes(scalar_pair_docs, capsys):
    status = main(["check-product", *scalar_pair_docs, "-D", "6"])
    out = capsys.readouterr().out
    assert status == 0
    assert "check name=coeff_condition verdict=pass" in out
    assert "check name=point_condition verdict=pass" in out
    assert "check name=toeplitz verdict=pass" in out
    assert "check name=scalar_disjoint_variables verdict=pass" in out


def test_check_product_shared_variable_fails(tmp_path, capsys):
    p1 = tmp_path / "za.json"
    p2 = tmp_path / "zb.json"
    write_symbol(scalar_symbol(1, {(1,): 1.0}), p1)
    write_symbol(scalar_symbol(1, {(1,): 1.0}), p2)
    status = main(["check-product", str(p1), str(p2), "-D", "6"])
    out = capsys.readouterr().out
    assert status == 1
    assert "check name=coeff_condition verdict=fail" in out
    assert "witness=i=1" in out


def test_decompose_bidisc_pair_reports_nine_terms(tmp_path, capsys):
    from polytoep import random_product_pair
    gamma, psi = random_product_pair(2, 3, 2, degree=2, satisfy=True, seed=4)
    p1, p2 = tmp_path / "g.json", tmp_path / "p.json"
    write_symbol(gamma, p1)
    write_symbol(psi, p2)
    status = main(["decompose", str(p1), str(p2), "-D", "6"])
    out = capsys.readouterr().out
    assert status == 0
    assert sum(1 for line in out.splitlines() if line.startswith("term ")) == 9
    assert "formula" in out
    assert "check name=decomposition_reconstruction verdict=pass" in out


def test_decompose_rejects_violating_pair(tmp_path, capsys):
    from polytoep import random_product_pair
    gamma, psi = random_product_pair(2, 2, 2, degree=2, satisfy=False, seed=4)
    p1, p2 = tmp_path / "g.json", tmp_path / "p.json"
    write_symbol(gamma, p1)
    write_symbol(psi, p2)
    status = main(["decompose", str(p1), str(p2), "-D", "6"])
    out = capsys.readouterr().out
    assert status == 1
    assert "verdict=error" in out
    assert "violation i=" in out


def test_factor_subcommand_on_nilpotent(theta_doc, capsys):
    status = main(["factor", theta_doc, "-D", "6"])
    out = capsys.readouterr().out
    assert status == 0
    assert "check name=factor_reconstruction verdict=pass" in out
    assert "check name=inner_left_factor verdict=pass" in out
    assert "check name=product_condition verdict=pass" in out


def test_factor_subcommand_rejects_boundary_example(tmp_path, capsys):
    path = tmp_path / "phi.json"
    write_symbol(boundary_partial_isometry(), path)
    status = main(["factor", str(path), "-D", "6"])
    out = capsys.readouterr().out
    assert status == 1
    assert "verdict=fail" in out or "verdict=error" in out


def test_check_toeplitz_subcommand(theta_doc, capsys):
    status = main(["check-toeplitz", theta_doc, "-D", "5"])
    out = capsys.readouterr().out
    assert status == 0
    assert "check name=toeplitz verdict=pass" in out


def test_selftest_all_green(capsys):
    status = main(["selftest"])
    out = capsys.readouterr().out
    assert status == 0, out
    assert "verdict=fail" not in out and "verdict=error" not in out


def test_reports_are_byte_identical(theta_doc, tmp_path):
    out1 = tmp_path / "a.txt"
    out2 = tmp_path / "b.txt"
    assert main(["classify", theta_doc, "-D", "5", "--seed", "7",
                 "--out", str(out1)]) == \
        main(["classify", theta_doc, "-D", "5", "--seed", "7",
              "--out", str(out2)])
    assert out1.read_bytes() == out2.read_bytes()


def test_report_header_echoes_config(theta_doc, capsys):
    main(["classify", theta_doc, "-D", "5", "--tol", "1e-8", "--samples", "9",
          "--seed", "3"])
    out = capsys.readouterr().out
    head = out.splitlines()[1]
    assert "subcommand=classify" in head
    assert "degree=5" in head and "samples=9" in head and "seed=3" in head
    assert "tol=1.000000000000e-08" in head


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    status = main(["classify", str(bad)])
    err = capsys.readouterr().err
    assert status == 2
    assert "bad.json" in err


def test_env_var_degree_override(theta_doc, capsys, monkeypatch):
    monkeypatch.setenv("POLYTOEP_DEGREE", "4")
    status = main(["classify", theta_doc])
    out = capsys.readouterr().out
    assert "degree=4" in out.splitlines()[1]


def test_job_config_validation():
    with pytest.raises(ValueError):
        JobConfig("classify", ["x"], degree=0)
    with pytest.raises(ValueError):
        JobConfig("classify", ["x"], tol=-1.0)
    with pytest.raises(ValueError):
        run(JobConfig("classify", []))


def test_summary_line_counts(theta_doc, capsys):
    main(["classify", theta_doc, "-D", "5"])
    out = capsys.readouterr().out.splitlines()
    assert out[-1].startswith("summary checks=")