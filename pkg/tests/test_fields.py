import pytest

from hjgen.errors import ConfigError
from hjgen.fields import (
    ActionField,
    SolutionField,
    Status,
    check_axis,
    read_field_csv,
    sweep,
    write_field_csv,
)


def test_check_axis():
    assert check_axis([0, 0.5, 1]) == (0.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        check_axis([])
    with pytest.raises(ValueError):
        check_axis([0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        check_axis([1.0, 0.5])


def _toy_field():
    xs = (0.0, 0.5, 1.0)
    ys = (0.0, 1.0)
    q = [[0.1, None], [0.2, 0.25], [None, 0.3]]
    u = [[1.0, None], [2.0, 2.5], [None, 3.0]]
    st = [
        [Status.RESOLVED, Status.NO_ROOT],
        [Status.RESOLVED, Status.MULTI_ROOT],
        [Status.DOMAIN_FAIL, Status.RESOLVED],
    ]
    return SolutionField(xs, ys, q, u, st)


def test_resolved_fraction_counts_strictly_resolved():
    field = _toy_field()
    assert field.resolved_fraction() == pytest.approx(3.0 / 6.0)
    assert field.has_value(1, 1)  # multi_root still carries a value
    assert not field.has_value(0, 1)


def test_solution_csv_round_trip(tmp_path):
    field = _toy_field()
    path = tmp_path / "field.csv"
    write_field_csv(field, str(path))
    back = read_field_csv(str(path))
    assert isinstance(back, SolutionField)
    assert back.axis1 == field.axis1
    assert back.axis2 == field.axis2
    assert back.q == field.q
    assert back.value == field.value
    assert back.status == field.status


def test_action_csv_round_trip_17_digits(tmp_path):
    xs = (0.1, 0.2)
    ts = (0.0, 0.3)
    q = [[1 / 3, 0.1], [None, 2 / 7]]
    s = [[0.123456789012345678, 1e-17], [None, 3.0]]
    p = [[1.0, 2.0], [None, 4.0]]
    st = [
        [Status.RESOLVED, Status.MULTI_ROOT],
        [Status.NO_ROOT, Status.RESOLVED],
    ]
    field = ActionField(xs, ts, q, s, st, p)
    path = tmp_path / "field.csv"
    write_field_csv(field, str(path))
    text = path.read_text()
    assert text.splitlines()[0] == "x,t,q,S,p,status"
    back = read_field_csv(str(path))
    assert isinstance(back, ActionField)
    assert back.q == q and back.value == s and back.p == p


def test_read_rejects_truncated_row(tmp_path):
    path = tmp_path / "broken.csv"
    path.write_text("x,y,q,u,status\n0,0,1,2,resolved\n0,1,1\n")
    with pytest.raises(ConfigError) as err:
        read_field_csv(str(path))
    assert err.value.line == 3


def test_read_rejects_unknown_header_and_status(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text("a,b,c\n")
    with pytest.raises(ConfigError):
        read_field_csv(str(path))
    path.write_text("x,y,q,u,status\n0,0,1,2,nonsense\n")
    with pytest.raises(ConfigError):
        read_field_csv(str(path))


def test_read_rejects_presence_mismatch(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("x,y,q,u,status\n0,0,,,resolved\n")
    with pytest.raises(ConfigError):
        read_field_csv(str(path))


def test_read_rejects_incomplete_grid(tmp_path):
    path = tmp_path / "g.csv"
    path.write_text(
        "x,y,q,u,status\n0,0,1,1,resolved\n0,1,1,1,resolved\n1,0,1,1,resolved\n"
    )
    with pytest.raises(ConfigError):
        read_field_csv(str(path))


def _sweep_orders(threads):
    calls = []

    def solver(i, j, warm):
        calls.append((i, j, warm))
        return 10.0 * i + j, Status.RESOLVED

    q, status = sweep(solver, 3, 4, threads)
    return q, status, calls


def test_sweep_warm_start_wiring():
    q, status, calls = _sweep_orders(0)
    warm = {(i, j): w for i, j, w in calls}
    assert warm[(0, 0)] is None  # origin runs cold
    assert warm[(1, 0)] == q[0][0]  # first column from the previous row
    assert warm[(2, 0)] == q[1][0]
    assert warm[(1, 2)] == q[1][1]  # everything else from the left neighbour
    assert all(status[i][j] is Status.RESOLVED for i in range(3) for j in range(4))


def test_sweep_threaded_matches_serial():
    serial = _sweep_orders(0)[0]
    threaded = _sweep_orders(4)[0]
    assert serial == threaded
