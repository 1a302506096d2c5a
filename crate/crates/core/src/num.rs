//! Float text formatting shared by every exported file.

use std::fmt;

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-4, 1e15)` so tiny p-values stay readable. NaN prints as `nan`.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.0;
        if v.is_nan() {
            f.write_str("nan")
        } else if v != 0.0 && v.is_finite() && !(1e-4..1e15).contains(&v.abs()) {
            write!(f, "{v:e}")
        } else {
            write!(f, "{v}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        for v in [0.0, 1.5, -2.25e-7, 1.4238432481480027e-62, 3e20, 0.001] {
            let s = Num(v).to_string();
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(Num(1.4e-62).to_string(), "1.4e-62");
        assert_eq!(Num(0.25).to_string(), "0.25");
        assert_eq!(Num(f64::NAN).to_string(), "nan");
    }
}
