//! Fixed 17-significant-digit decimal formatting used by every CSV writer.

/// Scientific notation with 17 significant digits; round-trips every `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}
