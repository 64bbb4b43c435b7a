use localsign_py::localsign_module;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::ffi::CString;

fn run(code: &str) -> PyResult<()> {
    pyo3::append_to_inittab!(localsign_module);
    Python::initialize();
    Python::attach(|py| {
        let globals = PyDict::new(py);
        py.run(&CString::new(code).unwrap(), Some(&globals), None)
    })
}

#[test]
fn module_round_trip() {
    run(r#"
import json, localsign
t = localsign.QuadExtension(3, "ram-minus-p").partition(max_order_exp=2)
assert t.is_balanced() and len(t) == 9
assert localsign.gamma_constant([(2, 1), (-1, 1)]) == (-1, 1)
m = localsign.Module.from_json(json.dumps({"coeff": {"p": 3, "m": 1, "f": 1}, "construction": "sum",
    "chars": [{"at_p": 2, "at_gen": 1}, {"at_p": 2, "at_gen": 2}]}))
sd = m.decompose()
assert sd.dims == (0, 2, 0) and sd.agreement
try:
    localsign.Module.from_json("{}")
    raise AssertionError
except localsign.InputError:
    pass
"#)
    .unwrap();
}
