//! Drives the bindings from an embedded interpreter.

use std::ffi::CString;
use std::sync::Once;

use pyo3::prelude::*;
use qtrop_py::qtrop_py;

fn interpreter() {
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        pyo3::append_to_inittab!(qtrop_py);
        Python::initialize();
    });
}

fn run(code: &str) {
    interpreter();
    Python::attach(|py| {
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, None, None) {
            e.print(py);
            panic!("python code raised");
        }
    });
}

#[test]
fn scalars_and_psd() {
    run(r#"
import qtrop_py as qt
one, pi = qt.Scalar(1), qt.Scalar(1, e_num=1)
assert (one + pi) ** 2 == one + qt.Scalar(2) * pi + pi * pi
assert qt.psd([qt.Scalar(4), one], 2) == qt.Scalar(9)
assert qt.zero_sum_roots([one, qt.Scalar(4)], 2) is None
assert qt.ledger(6, [3, -9, 6])[3] == 2
"#);
}

#[test]
fn datum_round_trip() {
    run(r#"
import json
import qtrop_py as qt
for name in qt.fixture_names():
    g = qt.Datum.fixture(name)
    assert g.is_valid(), name
    assert g.lift().reduce().differences(g) == [], name
    assert qt.Datum.from_json(g.to_json()).differences(g) == [], name
"#);
}

#[test]
fn errors_become_exceptions() {
    run(r#"
import qtrop_py as qt
try:
    qt.Datum.from_json("{")
except ValueError:
    pass
else:
    raise AssertionError("malformed JSON accepted")
try:
    qt.Scalar(2).nth_root(2)
except RuntimeError as e:
    assert "root not representable" in str(e)
else:
    raise AssertionError("√2 found in Q")
"#);
}
