//! Shared numeric formatting for file outputs.

/// Fixed-width scientific notation with 10 significant digits.
///
/// Ten digits keep round-trip parse errors below 1e-9 relative while staying
/// byte-deterministic across runs and platforms.
pub(crate) fn fmt_sig(x: f64) -> String {
    format!("{x:.9e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_tight() {
        for &x in &[10.0, 10.5, 26.632845931007, -0.4999, 3.33486628e-1, 0.0] {
            let s = fmt_sig(x);
            let back: f64 = s.parse().unwrap();
            let denom = x.abs().max(1e-300);
            assert!(
                (back - x).abs() / denom <= 1e-9,
                "{x} -> {s} -> {back}"
            );
        }
    }
}
