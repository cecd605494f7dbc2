//! Deterministic text formatting for CSV and JSON outputs.

/// Shortest decimal text that round-trips to the same `f64`. Plain
/// notation in `[1e-5, 1e16)`, exponent notation elsewhere.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let a = v.abs();
    if (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Same as [`fmt_f64`], but `None` becomes an empty field.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}
