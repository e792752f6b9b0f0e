"""Figure rendering: slopes, determinism, error handling."""

import subprocess
import sys

import numpy as np
import pytest

from hoqmc_plots.render import FigureSpec, _build_figure, load_csv, render


def write_csv(path, ns, errs, extra_meta=""):
    lines = ["# experiment = prior", "# basis = kl", "# alpha = 2"]
    if extra_meta:
        lines.append(extra_meta)
    lines.append("m,N,estimate,reference,abs_error,seconds")
    for m, (n, e) in enumerate(zip(ns, errs), start=3):
        lines.append(f"{m},{n},1.0,1.0,{e!r},0.1")
    path.write_text("\n".join(lines) + "\n")


def fitted_slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def test_series_parallel_to_guide(tmp_path):
    ns = [2**m for m in range(3, 13)]
    errs = [float(n) ** -2.0 for n in ns]
    csv = tmp_path / "exact.csv"
    write_csv(csv, ns, errs)
    spec = FigureSpec(
        csv_paths=(str(csv),), out_path=str(tmp_path / "fig.svg"),
        guide_slopes=(-2.0,),
    )
    fig, ax = _build_figure(spec)
    lines = ax.get_lines()
    assert len(lines) == 2  # series plus one guide
    slopes = [fitted_slope(*line.get_data()) for line in lines]
    assert abs(slopes[0] - slopes[1]) <= 0.02


def test_rerender_is_byte_identical(tmp_path):
    ns = [2**m for m in range(3, 10)]
    errs = [3.0 * float(n) ** -1.7 for n in ns]
    csv = tmp_path / "a.csv"
    write_csv(csv, ns, errs)
    s1 = FigureSpec(csv_paths=(str(csv),), out_path=str(tmp_path / "f1.svg"))
    s2 = FigureSpec(csv_paths=(str(csv),), out_path=str(tmp_path / "f2.svg"))
    render(s1)
    render(s2)
    assert (tmp_path / "f1.svg").read_bytes() == (tmp_path / "f2.svg").read_bytes()


def test_multiple_series_and_labels(tmp_path):
    ns = [2**m for m in range(3, 9)]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(a, ns, [n**-2.0 for n in ns])
    write_csv(b, ns, [n**-0.5 for n in ns])
    spec = FigureSpec(
        csv_paths=(str(a), str(b)), out_path=str(tmp_path / "f.svg"),
        guide_slopes=(-2.0, -0.5), labels=("qmc", "mc"),
    )
    fig, ax = _build_figure(spec)
    labels = [line.get_label() for line in ax.get_lines()]
    assert labels[:2] == ["qmc", "mc"]
    assert any("N^-2" in l for l in labels)


def test_legend_from_metadata(tmp_path):
    ns = [8, 16, 32]
    csv = tmp_path / "a.csv"
    write_csv(csv, ns, [n**-2.0 for n in ns])
    spec = FigureSpec(csv_paths=(str(csv),), out_path=str(tmp_path / "f.svg"))
    fig, ax = _build_figure(spec)
    assert ax.get_lines()[0].get_label() == "prior/kl/2"


def test_missing_column_named(tmp_path):
    csv = tmp_path / "a.csv"
    write_csv(csv, [8, 16], [0.1, 0.01])
    spec = FigureSpec(
        csv_paths=(str(csv),), out_path=str(tmp_path / "f.svg"), y_column="nope"
    )
    with pytest.raises(ValueError, match="nope"):
        render(spec)


def test_empty_series_names_file(tmp_path):
    csv = tmp_path / "empty.csv"
    csv.write_text("# experiment = prior\nm,N,estimate,reference,abs_error,seconds\n")
    spec = FigureSpec(csv_paths=(str(csv),), out_path=str(tmp_path / "f.svg"))
    with pytest.raises(ValueError, match="empty.csv"):
        render(spec)


def test_nonpositive_errors_dropped(tmp_path):
    csv = tmp_path / "a.csv"
    write_csv(csv, [8, 16, 32], [1e-2, 0.0, 1e-4])
    spec = FigureSpec(csv_paths=(str(csv),), out_path=str(tmp_path / "f.svg"))
    fig, ax = _build_figure(spec)
    x, y = ax.get_lines()[0].get_data()
    assert len(x) == 2  # the zero row is gone


def test_load_csv_round_trip(tmp_path):
    ns = [8, 16]
    csv = tmp_path / "a.csv"
    write_csv(csv, ns, [0.5, 0.125])
    meta, cols = load_csv(csv)
    assert meta["experiment"] == "prior"
    assert list(cols["N"]) == [8.0, 16.0]
    assert list(cols["abs_error"]) == [0.5, 0.125]


def test_cli_end_to_end(tmp_path):
    ns = [2**m for m in range(3, 9)]
    csv = tmp_path / "a.csv"
    write_csv(csv, ns, [n**-2.0 for n in ns])
    out = tmp_path / "fig.svg"
    r = subprocess.run(
        [sys.executable, "-m", "hoqmc_plots.cli", str(csv), "--out", str(out),
         "--guides=-2,-0.5", "--labels", "series"],
        capture_output=True, text=True,
    )
    assert r.returncode == 0, r.stderr
    assert out.exists()
    assert out.read_text().startswith("<?xml")


def test_cli_error_exit(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "hoqmc_plots.cli", str(tmp_path / "missing.csv")],
        capture_output=True, text=True,
    )
    assert r.returncode != 0
    assert "missing.csv" in r.stderr
