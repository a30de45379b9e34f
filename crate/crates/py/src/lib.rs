use pyo3::prelude::*;

#[pymodule]
fn haken_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
