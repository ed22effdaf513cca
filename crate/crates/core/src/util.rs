//! Small numeric and formatting helpers shared across modules.

/// Wrap a value into `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs.
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Circular distance between two positions on the unit circle `[0, 1)`.
///
/// Offsets 0.0 and 0.99 describe near-synchronous legs, so comparisons use
/// `min(|d|, 1 - |d|)` rather than plain `|a - b|`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_unit(a - b);
    d.min(1.0 - d)
}

/// Format an `f64` with 17 significant digits, enough for a lossless
/// round-trip through text.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_unit_stays_in_range() {
        for &x in &[-3.7, -1.0, -0.25, 0.0, 0.5, 0.9999999, 1.0, 2.3, 1e9] {
            let w = wrap_unit(x);
            assert!((0.0..1.0).contains(&w), "wrap_unit({x}) = {w}");
        }
        assert_eq!(wrap_unit(-1e-18), 0.0);
    }

    #[test]
    fn circular_distance_wraps() {
        assert!((circular_distance(0.0, 0.99) - 0.01).abs() < 1e-12);
        assert!((circular_distance(0.25, 0.75) - 0.5).abs() < 1e-12);
        assert_eq!(circular_distance(0.3, 0.3), 0.0);
    }

    #[test]
    fn fmt_round_trips() {
        for &x in &[
            0.0,
            -0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            6.62607015e-34,
            -1.7976931348623157e308,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "round trip of {s}");
        }
    }
}
