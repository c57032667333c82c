import numpy as np
import pytest

from medecomp import DataError, Dataset, generate_scm, simulate_dataset
from medecomp.dataset import format_float, read_csv_columns


def _tiny():
    return Dataset(
        covariates=np.array([[0.1], [0.2], [0.3]]),
        exposure=np.array([1.0, 0.0, 1.0]),
        mediators=np.array([[0.0], [1.0], [1.0]]),
        outcome=np.array([1.5, -0.5, 2.0]),
        covariate_names=("L",),
        mediator_names=("M1",),
    )


class TestValidation:
    def test_rejects_non_binary_exposure(self):
        with pytest.raises(DataError, match="0 or 1"):
            Dataset(
                covariates=np.zeros((2, 1)),
                exposure=np.array([0.5, 1.0]),
                mediators=np.zeros((2, 1)),
                outcome=np.zeros(2),
                covariate_names=("L",),
                mediator_names=("M",),
            )

    def test_rejects_non_finite(self):
        with pytest.raises(DataError, match="non-finite"):
            Dataset(
                covariates=np.array([[np.inf], [0.0]]),
                exposure=np.array([0.0, 1.0]),
                mediators=np.zeros((2, 1)),
                outcome=np.zeros(2),
                covariate_names=("L",),
                mediator_names=("M",),
            )

    def test_rejects_empty(self):
        with pytest.raises(DataError, match="at least one row"):
            Dataset(
                covariates=np.zeros((0, 1)),
                exposure=np.zeros(0),
                mediators=np.zeros((0, 1)),
                outcome=np.zeros(0),
                covariate_names=("L",),
                mediator_names=("M",),
            )

    def test_both_levels_check(self):
        data = Dataset(
            covariates=np.zeros((2, 1)),
            exposure=np.array([1.0, 1.0]),
            mediators=np.zeros((2, 1)),
            outcome=np.zeros(2),
            covariate_names=("L",),
            mediator_names=("M",),
        )
        with pytest.raises(DataError, match="both exposure levels"):
            data.require_both_exposure_levels()


class TestCsv:
    def test_float_format_round_trips(self):
        for value in (0.1, 1 / 3, 1e-17, 12345.6789, -0.0):
            assert float(format_float(value)) == value

    def test_csv_round_trip(self, tmp_path, independent_dag):
        spec = generate_scm(independent_dag, seed=7)
        data = simulate_dataset(spec, 200, seed=5)
        path = tmp_path / "d.csv"
        data.to_csv(str(path))
        cols = read_csv_columns(str(path))
        for name in data.column_names:
            assert np.array_equal(cols[name], data.column(name))

    def test_binary_columns_written_as_ints(self):
        text = _tiny().to_csv_text()
        line = text.splitlines()[1]
        cells = line.split(",")
        assert cells[1] == "1" and cells[2] == "0"

    def test_reader_reports_bad_cell_location(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n3,oops\n")
        with pytest.raises(DataError, match="line 3.*'b'"):
            read_csv_columns(str(path))

    def test_reader_rejects_missing_value(self, tmp_path):
        path = tmp_path / "gap.csv"
        path.write_text("a,b\n1,\n")
        with pytest.raises(DataError, match="missing value"):
            read_csv_columns(str(path))


class TestAccess:
    def test_columns_and_take(self):
        data = _tiny()
        assert data.column_names == ("L", "A", "M1", "Y")
        assert np.array_equal(data.mediator(1), data.mediators[:, 0])
        sub = data.take(np.array([2, 0]))
        assert sub.n == 2
        assert sub.outcome[0] == 2.0

    def test_unknown_column(self):
        with pytest.raises(DataError, match="unknown column"):
            _tiny().column("Q")
