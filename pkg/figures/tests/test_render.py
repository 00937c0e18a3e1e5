"""Renderer contracts: schema checking, empty-input handling, image output."""

from pathlib import Path

import pytest

from tsb_figures import SchemaError, render
from tsb_figures.cli import main as cli_main


def write_csv(path: Path, schema: str, header: str, body: list[str]) -> Path:
    lines = [f"# schema: {schema}", header, *body]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def pernode_csv(tmp_path):
    header = "iter,node,a,w_norm,r,theta_0,theta_1"
    body = []
    for k in (0, 10, 20):
        for node in range(3):
            r = 0.1 + 0.02 * k * (node + 1) / 3
            body.append(f"{k},{node},{r},1.0,{r},{1.0 if node else 0.0},{0.0 if node else 1.0}")
    return write_csv(tmp_path / "pernode.csv", "pernode-v1", header, body)


@pytest.fixture
def teachers_csv(tmp_path):
    header = "node,amplitude,theta_0,theta_1"
    return write_csv(
        tmp_path / "teachers.csv", "teachers-v1", header, ["0,1.0,1.0,0.0", "1,1.0,0.0,1.0"]
    )


@pytest.fixture
def losscurves_csv(tmp_path):
    header = "series,iter,train_risk,objective_F,objective_J,test_l2"
    body = [
        f"M{m},{k},{0.5 * 0.99 ** k + 1e-6},{0.5 * 0.99 ** k},{0.5 * 0.99 ** k},{0.4 * 0.99 ** k + 1e-6}"
        for m in (5, 100)
        for k in range(0, 200, 10)
    ]
    return write_csv(tmp_path / "loss.csv", "losscurves-v1", header, body)


@pytest.fixture
def summary_csv(tmp_path):
    header = (
        "axis,value,seed,m,d,n,M,lambda,reg,alpha,max_iters,iters_run,final_F,final_J,"
        "final_risk,amplitude_error,direction_error,max_direction_rms,stray_mass,"
        "k0,linear_rate,fit_r2,phase_failed,status"
    )
    body = [
        f"lambda,{lam},0,2,4,500,50,{lam},PathL1,0.1,1000,1000,0,0,0,{200 * lam ** 2},0,0,0,,,,,ok"
        for lam in (4e-3, 2e-3, 1e-3, 5e-4)
    ]
    return write_csv(tmp_path / "summary.csv", "summary-v1", header, body)


@pytest.fixture
def landscape_csv(tmp_path):
    header = "angle,f_star,f_bar"
    body = [f"{0.01 * k},{0.9},{0.89}" for k in range(100)]
    return write_csv(tmp_path / "landscape.csv", "certlandscape-v1", header, body)


class TestRenderKinds:
    def test_dynamics2d(self, pernode_csv, teachers_csv, tmp_path):
        out = render("dynamics2d", [pernode_csv, teachers_csv], tmp_path / "dyn.png")
        assert out.exists() and out.stat().st_size > 0

    def test_loss_curves(self, losscurves_csv, tmp_path):
        out = render("loss_curves", [losscurves_csv], tmp_path / "loss.png")
        assert out.exists() and out.stat().st_size > 0

    def test_scaling(self, summary_csv, tmp_path):
        out = render("scaling", [summary_csv], tmp_path / "scaling.png")
        assert out.exists() and out.stat().st_size > 0

    def test_certificate_landscape(self, landscape_csv, tmp_path):
        out = render("certificate_landscape", [landscape_csv], tmp_path / "cert.png")
        assert out.exists() and out.stat().st_size > 0

    def test_unknown_kind(self, losscurves_csv, tmp_path):
        with pytest.raises(SchemaError):
            render("sparkline", [losscurves_csv], tmp_path / "x.png")


class TestSchemaEnforcement:
    def test_wrong_schema_rejected(self, losscurves_csv, tmp_path):
        with pytest.raises(SchemaError) as excinfo:
            render("dynamics2d", [losscurves_csv], tmp_path / "x.png")
        assert "pernode-v1" in str(excinfo.value)

    def test_missing_column_named(self, tmp_path):
        bad = write_csv(
            tmp_path / "bad.csv", "losscurves-v1", "series,iter,objective_F", ["a,0,1.0"]
        )
        with pytest.raises(SchemaError) as excinfo:
            render("loss_curves", [bad], tmp_path / "x.png")
        assert "train_risk" in str(excinfo.value)

    def test_header_only_renders_empty_axes(self, tmp_path):
        empty = write_csv(
            tmp_path / "empty.csv",
            "losscurves-v1",
            "series,iter,train_risk,objective_F,objective_J,test_l2",
            [],
        )
        out = render("loss_curves", [empty], tmp_path / "empty.png")
        assert out.exists() and out.stat().st_size > 0

    def test_no_schema_line(self, tmp_path):
        bare = tmp_path / "bare.csv"
        bare.write_text("series,iter\n")
        with pytest.raises(SchemaError):
            render("loss_curves", [bare], tmp_path / "x.png")

    def test_idempotent_and_input_untouched(self, losscurves_csv, tmp_path):
        before = losscurves_csv.read_bytes()
        out = tmp_path / "twice.png"
        render("loss_curves", [losscurves_csv], out)
        first = out.stat().st_size
        render("loss_curves", [losscurves_csv], out)
        assert out.stat().st_size > 0 and first > 0
        assert losscurves_csv.read_bytes() == before


class TestCli:
    def test_render_success(self, losscurves_csv, tmp_path, capsys):
        rc = cli_main(
            ["render", "--kind", "loss_curves", "--in", str(losscurves_csv),
             "--out", str(tmp_path / "out.png")]
        )
        assert rc == 0
        assert (tmp_path / "out.png").exists()

    def test_schema_error_exit_code(self, losscurves_csv, tmp_path, capsys):
        rc = cli_main(
            ["render", "--kind", "dynamics2d", "--in", str(losscurves_csv),
             "--out", str(tmp_path / "out.png")]
        )
        assert rc == 2
        assert "schema error" in capsys.readouterr().err

    def test_missing_file_exit_code(self, tmp_path, capsys):
        rc = cli_main(
            ["render", "--kind", "loss_curves", "--in", str(tmp_path / "nope.csv"),
             "--out", str(tmp_path / "out.png")]
        )
        assert rc == 2
