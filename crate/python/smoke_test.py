"""Smoke test for the localsign Python bindings.

Install first:  pip install -e crates/localsign-py --no-build-isolation
"""

import json

import localsign

SUM3 = {
    "coeff": {"p": 3, "m": 1, "f": 1},
    "construction": "sum",
    "chars": [{"at_p": 2, "at_gen": 1}, {"at_p": 2, "at_gen": 2}],
}


def check_tables():
    ext = localsign.QuadExtension(5, "ram-minus-p")
    table = ext.partition(max_order_exp=2)
    assert ext.is_ramified and ext.delta_sq == -5
    assert len(table) == 25 and table.is_balanced()
    for n, plus, minus in table.counts_by_order():
        assert n == 0 or plus == minus
    unram = localsign.QuadExtension(3, "unram").partition(max_order_exp=2)
    for _, _, conductor, _, _, label in unram.records:
        assert label == ("+" if conductor % 2 == 0 else "-")
    assert json.loads(table.to_json())["header"]["p"] == 5


def check_gamma():
    for k in range(1, 11):
        assert localsign.gamma_constant([(k, 1), (1 - k, 1)]) == ((-1) ** (k - 1), 1)


def check_decomposition():
    module = localsign.Module.from_json(json.dumps(SUM3))
    assert module.cohomology_dims() == (0, 2, 0)
    sd = module.decompose()
    assert sd.agreement and sd.sub_label == 1
    assert sd.cross_pairing != 0
    anomalous = dict(SUM3, chars=[{"at_p": 1, "at_gen": 1}, {"at_p": 1, "at_gen": 2}])
    try:
        localsign.Module.from_json(json.dumps(anomalous)).decompose()
    except localsign.InputError:
        pass
    else:
        raise AssertionError("module with invariants accepted")


def check_mazur_rubin():
    pair = {
        "first": {"module": SUM3, "positive_summand": 1, "weight": 1},
        "second": {"module": SUM3, "positive_summand": 2, "weight": 2},
    }
    rep = localsign.mazur_rubin(json.dumps(pair))
    assert (rep.delta, rep.epsilon_ratio, rep.holds) == (1, -1, True)
    for p in (3, 5):
        assert localsign.anomalous_split_check(p) == (1, 1, True)
    try:
        localsign.mazur_rubin('{"first": 1}')
    except localsign.LocalSignError:
        pass
    else:
        raise AssertionError("malformed pair accepted")


def check_cli():
    code, out = localsign.run_cli(["epsilon-table", "--p", "3", "--kind", "ram-minus-pu"])
    assert code == 0 and json.loads(out)["passed"]
    again = localsign.run_cli(["epsilon-table", "--p", "3", "--kind", "ram-minus-pu"])
    assert again == (code, out)
    code, _ = localsign.run_cli(["epsilon-table", "--p", "3", "--kind", "bogus"])
    assert code == 2


if __name__ == "__main__":
    for check in (check_tables, check_gamma, check_decomposition, check_mazur_rubin, check_cli):
        check()
        print(f"ok  {check.__name__}")
    print(f"localsign {localsign.__version__}: smoke test passed")
