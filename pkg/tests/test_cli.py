import json
from types import SimpleNamespace

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from cluster_c3l import EXIT_INPUT, EXIT_OK, EXIT_OPTIMIZATION, RunSpec, ingest, main, parse_hyperplane
from clustering.errors import InputError
from result_writer import SUMMARY_FILE, read_result, result_filename


@pytest.fixture
def blob_csv(tmp_path, two_blobs):
    X, labels = two_blobs
    frame = pd.DataFrame({"x1": X[:, 0], "x2": X[:, 1], "label": [f"c{l}" for l in labels]})
    path = tmp_path / "blobs.csv"
    frame.to_csv(path, index=False)
    return path


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def run_cli(csv, out, *extra):
    return main(["--input", str(csv), "--hyperplane", "1,0;0", "--alpha", "0.01,0.5",
                 "--k", "2", "--restarts", "2", "--seed", "7", "--labels", "label",
                 "--out", str(out), "--quiet", *extra])


def last_error(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


class TestIngest:
    def test_selected_features(self, tmp_path):
        path = write_csv(tmp_path, "a,b,c\n1,2,3\n4,5,6\n7,8,9\n")
        data = ingest(path, RunSpec(input=path, features=["a", "b"], normal=[1, 0], offset=0))
        assert data.X.shape == (3, 2)
        assert data.X.dtype == np.float64
        np.testing.assert_array_equal(data.X[:, 1], [2.0, 5.0, 8.0])

    def test_feature_range(self, tmp_path):
        path = write_csv(tmp_path, "id,a,b,c\nx,1,2,3\ny,4,5,6\n")
        data = ingest(path, RunSpec(input=path, features=["a:c"], normal=[1, 0, 0], offset=0))
        assert data.columns == ["a", "b", "c"]

    def test_quoted_cells(self, tmp_path):
        path = write_csv(tmp_path, '"a","b"\n"1.5","2"\n"3","-4e1"\n')
        data = ingest(path, RunSpec(input=path, normal=[1, 0], offset=0))
        np.testing.assert_array_equal(data.X, [[1.5, 2.0], [3.0, -40.0]])

    def test_nan_cell_names_row_and_column(self, tmp_path):
        path = write_csv(tmp_path, "x1,x2\n1,2\n3,NaN\n5,6\n")
        with pytest.raises(InputError, match=r"row=3.*column=x2"):
            ingest(path, RunSpec(input=path, normal=[1, 0], offset=0))

    def test_text_cell_rejected(self, tmp_path):
        path = write_csv(tmp_path, "x1,x2\n1,2\nabc,4\n")
        with pytest.raises(InputError, match="column=x1"):
            ingest(path, RunSpec(input=path, normal=[1, 0], offset=0))

    def test_discriminant_column(self, tmp_path):
        path = write_csv(tmp_path, "ki,x\n50,1\n60,2\n")
        data = ingest(path, RunSpec(input=path, discriminant_col="ki", threshold=50))
        np.testing.assert_array_equal(data.X, [[0.0, 1.0], [10.0, 2.0]])
        np.testing.assert_array_equal(data.hyperplane.normal, [1.0, 0.0])

    def test_labels_kept_out_of_features(self, blob_csv):
        data = ingest(blob_csv, RunSpec(input=blob_csv, normal=[1, 0], offset=0, labels="label"))
        assert data.X.shape == (80, 2)
        assert set(data.labels) == {"c0", "c1"}

    def test_missing_file(self, tmp_path):
        path = tmp_path / "absent.csv"
        with pytest.raises(FileNotFoundError):
            ingest(path, RunSpec(input=path, normal=[1], offset=0))

    def test_empty_selection(self, tmp_path):
        path = write_csv(tmp_path, "label\na\nb\n")
        with pytest.raises(InputError):
            ingest(path, RunSpec(input=path, normal=[1], offset=0, labels="label"))

    def test_hyperplane_dimension(self, tmp_path):
        path = write_csv(tmp_path, "a,b\n1,2\n")
        with pytest.raises(InputError):
            ingest(path, RunSpec(input=path, normal=[1, 0, 0], offset=0))


class TestRunSpec:
    def test_exactly_one_boundary(self, tmp_path):
        with pytest.raises(ValidationError):
            RunSpec(input=tmp_path, normal=[1.0], offset=0.0, discriminant_col="f", threshold=1.0)
        with pytest.raises(ValidationError):
            RunSpec(input=tmp_path)

    @pytest.mark.parametrize("alphas", [[], [0.0], [0.1, 0.6], [0.05, 0.05]])
    def test_alpha_list(self, tmp_path, alphas):
        with pytest.raises(ValidationError):
            RunSpec(input=tmp_path, normal=[1.0], offset=0.0, alphas=alphas)

    def test_parse_hyperplane(self):
        assert parse_hyperplane("1, -2.5 ;0.75") == ([1.0, -2.5], 0.75)
        with pytest.raises(InputError):
            parse_hyperplane("1,2")


class TestExecute:
    def test_documents_and_summary(self, blob_csv, tmp_path):
        out = tmp_path / "out"
        assert run_cli(blob_csv, out) == EXIT_OK
        assert sorted(p.name for p in out.iterdir()) == [
            "c3l_alpha_0.01.jsonl", "c3l_alpha_0.5.jsonl", SUMMARY_FILE]

    def test_baseline_rows(self, blob_csv, tmp_path):
        out = tmp_path / "out"
        assert run_cli(blob_csv, out, "--baseline", "cec_h") == EXIT_OK
        summary = pd.read_csv(out / SUMMARY_FILE)
        assert len(summary) == 3
        assert sorted(summary["method"]) == ["c3l", "c3l", "cec_h"]
        assert list(summary["alpha"]) == sorted(summary["alpha"])
        baseline = summary[summary["method"] == "cec_h"].iloc[0]
        assert np.isnan(baseline["requested_alpha"])
        assert baseline["alpha"] == pytest.approx(baseline["max_leakage"])

    def test_reruns_are_byte_identical(self, blob_csv, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert run_cli(blob_csv, first, "--baseline", "cec") == EXIT_OK
        assert run_cli(blob_csv, second, "--baseline", "cec") == EXIT_OK
        names = sorted(p.name for p in first.iterdir())
        assert names == sorted(p.name for p in second.iterdir())
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_documents_round_trip(self, blob_csv, tmp_path, two_blobs):
        X, _ = two_blobs
        out = tmp_path / "out"
        assert run_cli(blob_csv, out) == EXIT_OK
        for alpha in ("0.01", "0.5"):
            doc = read_result(out / f"c3l_alpha_{alpha}.jsonl")
            assert doc.header["schema"] == "c3l-result/1"
            assert len(doc.models) == doc.header["k"]
            assert doc.assignment.shape == (80,)
            assert doc.recompute_cost(X) == pytest.approx(doc.header["cost"], abs=1e-8)
            assert doc.header["max_leakage"] <= float(alpha) + 1e-6
            assert 0.0 <= doc.header["nmi"] <= 1.0
            assert doc.trace["sweep_costs"]
            assert doc.path.name == f"c3l_alpha_{alpha}.jsonl"
            assert doc.hyperplane.normal.tolist() == [1.0, 0.0]
            assert [c["index"] for c in doc.clusters] == list(range(doc.header["k"]))
            assert sum(c["size"] for c in doc.clusters) == 80

    def test_summary_matches_documents(self, blob_csv, tmp_path):
        out = tmp_path / "out"
        assert run_cli(blob_csv, out) == EXIT_OK
        summary = pd.read_csv(out / SUMMARY_FILE)
        for _, row in summary.iterrows():
            header = read_result(out / row["document"]).header
            assert row["bic"] == pytest.approx(header["bic"], rel=1e-11)
            assert row["k"] == header["k"]


class TestExitCodes:
    def test_missing_input(self, tmp_path, capsys):
        assert run_cli(tmp_path / "absent.csv", tmp_path / "out") == EXIT_INPUT
        assert last_error(capsys)["error"] == "input_error"

    def test_bad_cell(self, tmp_path, capsys):
        path = write_csv(tmp_path, "x1,x2,label\n1,2,a\n3,NaN,b\n")
        assert run_cli(path, tmp_path / "out") == EXIT_INPUT
        assert "row=3" in last_error(capsys)["message"]

    def test_bad_hyperplane(self, blob_csv, tmp_path):
        assert main(["--input", str(blob_csv), "--hyperplane", "1,0", "--quiet"]) == EXIT_INPUT

    def test_both_boundary_forms(self, blob_csv, tmp_path):
        code = main(["--input", str(blob_csv), "--hyperplane", "1;0", "--discriminant-col", "x1",
                     "--threshold", "0", "--quiet"])
        assert code == EXIT_INPUT

    def test_alpha_out_of_range(self, blob_csv, tmp_path):
        code = main(["--input", str(blob_csv), "--hyperplane", "1,0;0", "--alpha", "0.7",
                     "--out", str(tmp_path / "out"), "--quiet"])
        assert code == EXIT_INPUT

    @pytest.mark.parametrize("form", [["--hyperplane", "-1,0;0"], ["--hyperplane=-1,0;0"]])
    def test_negative_leading_coefficient(self, blob_csv, tmp_path, form):
        out = tmp_path / "out"
        code = main(["--input", str(blob_csv), *form, "--features", "x1,x2", "--alpha", "0.05",
                     "--k", "2", "--restarts", "1", "--out", str(out), "--quiet"])
        assert code == EXIT_OK
        doc = read_result(out / "c3l_alpha_0.05.jsonl")
        assert doc.hyperplane.normal.tolist() == [-1.0, 0.0]
        assert doc.hyperplane.offset == 0.0

    def test_hyperplane_without_value(self, blob_csv):
        assert main(["--input", str(blob_csv), "--hyperplane", "--quiet"]) == EXIT_INPUT

    def test_unknown_flag(self, blob_csv):
        assert main(["--input", str(blob_csv), "--clusters", "3"]) == EXIT_INPUT

    def test_degenerate_data(self, tmp_path, capsys):
        rows = "\n".join(f"1.0,{v},a" for v in np.linspace(-1, 1, 20))
        path = write_csv(tmp_path, "x1,x2,label\n" + rows + "\n")
        code = main(["--input", str(path), "--hyperplane", "1,0;0", "--alpha", "0.1", "--k", "1",
                     "--restarts", "1", "--out", str(tmp_path / "out"), "--quiet"])
        assert code == EXIT_OPTIMIZATION
        assert last_error(capsys)["error"] == "optimization_error"


class TestResultFiles:
    def test_close_alphas_get_distinct_files(self):
        names = {result_filename(SimpleNamespace(method="c3l", alpha=a)) for a in (0.1, 0.1000001)}
        assert names == {"c3l_alpha_0.1.jsonl", "c3l_alpha_0.1000001.jsonl"}

    def test_numpy_alpha_and_baseline_names(self):
        assert result_filename(SimpleNamespace(method="c3l", alpha=np.float64(0.05))) == \
            "c3l_alpha_0.05.jsonl"
        assert result_filename(SimpleNamespace(method="cec_h", alpha=None)) == "cec_h.jsonl"

    def test_unknown_record_rejected(self, blob_csv, tmp_path):
        out = tmp_path / "out"
        assert run_cli(blob_csv, out) == EXIT_OK
        path = out / "c3l_alpha_0.5.jsonl"
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps({"record": "notes"}) + "\n")
        with pytest.raises(InputError):
            read_result(path)
