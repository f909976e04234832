use pyo3::prelude::*;

#[pymodule]
fn bergomi_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
